"""Deterministic SVG rendering of scenes (top-down, front edge at the bottom)."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .geometry import Scene

SCALE = 200.0  # px per table unit
MARGIN = 40.0

_PALETTE = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
    "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac",
]


@dataclass(frozen=True)
class RenderOptions:
    show_labels: bool = True
    show_features: bool = True
    show_ticks: bool = True
    reach_radius_units: float | None = None  # reach circles around point features


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def render_svg(scene: Scene, poses=None, options: RenderOptions | None = None) -> str:
    """SVG text for the scene; byte-stable for identical inputs (no time, no RNG)."""
    options = options or RenderOptions()
    poses = poses if poses is not None else scene.poses
    c = scene.container

    width = c.x_extent * SCALE + 2 * MARGIN
    height = c.y_extent * SCALE + 2 * MARGIN

    def sx(x: float) -> float:
        return MARGIN + (x - c.x_min) * SCALE

    def sy(y: float) -> float:
        # y axis flipped: the front edge (y_min) renders at the bottom
        return MARGIN + (c.y_max - y) * SCALE

    lines: list[str] = []
    lines.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(width)}" height="{_fmt(height)}" '
        f'viewBox="0 0 {_fmt(width)} {_fmt(height)}">'
    )
    lines.append(f'<rect width="{_fmt(width)}" height="{_fmt(height)}" fill="#ffffff"/>')
    lines.append(
        f'<rect x="{_fmt(sx(c.x_min))}" y="{_fmt(sy(c.y_max))}" '
        f'width="{_fmt(c.x_extent * SCALE)}" height="{_fmt(c.y_extent * SCALE)}" '
        f'fill="#f7f3e9" stroke="#333333" stroke-width="2"/>'
    )
    for comp in c.compartments:
        lines.append(
            f'<rect x="{_fmt(sx(comp.x_min))}" y="{_fmt(sy(comp.y_max))}" '
            f'width="{_fmt(comp.x_extent * SCALE)}" height="{_fmt(comp.y_extent * SCALE)}" '
            f'fill="none" stroke="#999999" stroke-width="1" stroke-dasharray="6,4"/>'
        )
    if options.show_features:
        for feat in c.features:
            x1, y1 = sx(feat.start[0]), sy(feat.start[1])
            x2, y2 = sx(feat.end[0]), sy(feat.end[1])
            if feat.is_point:
                lines.append(f'<circle cx="{_fmt(x1)}" cy="{_fmt(y1)}" r="6" fill="#d62728"/>')
                if options.reach_radius_units:
                    lines.append(
                        f'<circle cx="{_fmt(x1)}" cy="{_fmt(y1)}" r="{_fmt(options.reach_radius_units * SCALE)}" '
                        f'fill="none" stroke="#d62728" stroke-width="1" stroke-dasharray="4,4"/>'
                    )
            else:
                lines.append(
                    f'<line x1="{_fmt(x1)}" y1="{_fmt(y1)}" x2="{_fmt(x2)}" y2="{_fmt(y2)}" '
                    f'stroke="#1f77b4" stroke-width="6" stroke-linecap="round"/>'
                )
            if options.show_labels:
                lines.append(
                    f'<text x="{_fmt((x1 + x2) / 2)}" y="{_fmt((y1 + y2) / 2 - 8)}" '
                    f'font-family="monospace" font-size="11" text-anchor="middle" fill="#555555">{feat.name}</text>'
                )

    if poses is not None:
        for i, (obj, pose) in enumerate(zip(scene.objects, poses)):
            color = _PALETTE[i % len(_PALETTE)]
            w_px = obj.bbox.width * SCALE
            l_px = obj.bbox.length * SCALE
            cx, cy = sx(pose.x), sy(pose.y)
            deg = -math.degrees(pose.theta)  # screen y is flipped
            lines.append(f'<g transform="translate({_fmt(cx)},{_fmt(cy)}) rotate({_fmt(deg)})">')
            lines.append(
                f'<rect x="{_fmt(-w_px / 2)}" y="{_fmt(-l_px / 2)}" width="{_fmt(w_px)}" height="{_fmt(l_px)}" '
                f'fill="{color}" fill-opacity="0.55" stroke="{color}" stroke-width="1.5"/>'
            )
            if options.show_ticks:
                # facing tick: theta = 0 points toward the front edge
                lines.append(
                    f'<line x1="0" y1="0" x2="0" y2="{_fmt(l_px / 2)}" stroke="#222222" stroke-width="1.5"/>'
                )
            lines.append("</g>")
            if options.show_labels:
                lines.append(
                    f'<text x="{_fmt(cx)}" y="{_fmt(cy - l_px / 2 - 4)}" font-family="monospace" '
                    f'font-size="11" text-anchor="middle" fill="#333333">{obj.id}</text>'
                )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
