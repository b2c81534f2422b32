"""Constructive generators of positive examples for every relation.

Each relation has a direct parameterization of its satisfying set; samples are
drawn from the *interior* of the rule's tolerance region (roughly 80% of each
tolerance) so that models trained on them land inside the tolerance even with
sampling noise.  Every emitted example is re-checked against the classifier;
a failed construction is retried within a fixed budget.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from ..geometry import BoundingBox, Container, Feature, Pose, ValidationError, obb_aabb, wrap_angle
from .classifiers import (
    ALIGN_TOL_FRAC,
    CENTER_TOL_FRAC,
    CENTERED_TOL_FRAC,
    CENTRAL_BAND_FRAC,
    EDGE_NEAR_FRAC,
    FACING_TOL,
    GAP_MAX_FRAC,
    GRID_RESIDUAL_FRAC,
    SYM_POS_TOL_FRAC,
    TOUCH_GAP_FRAC,
    WALL_DIST_FRAC,
    ReachContext,
    classify,
)
from .registry import RelationKind, canonical_name, lookup

TRY_BUDGET = 10_000
MARGIN = 0.6  # stay inside this fraction of each tolerance
PAD = 0.02  # clearance from container edges, table units

SHAPE_MIN = 0.08
SHAPE_MAX = 0.6

REACH_LEVELS_M = (0.5, 0.6, 0.7)
REACH_MARGIN = 0.85


class GenerationBudgetError(RuntimeError):
    """Raised when a positive example cannot be constructed within the budget."""


@dataclass(frozen=True)
class SynthExample:
    relation: str
    shapes: tuple[BoundingBox, ...]
    poses: tuple[Pose, ...]
    context: object = None  # ReachContext or Feature for the feature relations

    def to_record(self) -> dict:
        rec: dict = {
            "relation": self.relation,
            "shapes": [[b.width, b.length] for b in self.shapes],
            "poses": [[p.x, p.y, p.theta] for p in self.poses],
        }
        if isinstance(self.context, ReachContext):
            rec["context"] = {"kind": "reach", "base": list(self.context.base), "radius_units": self.context.radius_units}
        elif isinstance(self.context, Feature):
            rec["context"] = {
                "kind": "segment",
                "name": self.context.name,
                "start": list(self.context.start),
                "end": list(self.context.end),
            }
        return rec

    @staticmethod
    def from_record(rec: dict) -> "SynthExample":
        ctx = None
        raw = rec.get("context")
        if raw is not None:
            if raw["kind"] == "reach":
                ctx = ReachContext(tuple(raw["base"]), float(raw["radius_units"]))
            else:
                ctx = Feature(raw.get("name", "segment"), tuple(raw["start"]), tuple(raw["end"]))
        return SynthExample(
            relation=rec["relation"],
            shapes=tuple(BoundingBox(w, l) for w, l in rec["shapes"]),
            poses=tuple(Pose(x, y, t) for x, y, t in rec["poses"]),
            context=ctx,
        )


class _Retry(Exception):
    """Internal: construction attempt infeasible, redraw."""


def _u(rng, lo, hi) -> float:
    if hi < lo:
        raise _Retry
    return float(rng.uniform(lo, hi))


def _rot_half_extents(bbox: BoundingBox, theta: float) -> tuple[float, float]:
    hx = abs(bbox.width / 2 * math.cos(theta)) + abs(bbox.length / 2 * math.sin(theta))
    hy = abs(bbox.width / 2 * math.sin(theta)) + abs(bbox.length / 2 * math.cos(theta))
    return hx, hy


def _inside_pose(rng, container: Container, bbox: BoundingBox, theta=0.0, x_range=None, y_range=None) -> Pose:
    hx, hy = _rot_half_extents(bbox, theta)
    lo_x, hi_x = container.x_min + hx + PAD, container.x_max - hx - PAD
    lo_y, hi_y = container.y_min + hy + PAD, container.y_max - hy - PAD
    if x_range:
        lo_x, hi_x = max(lo_x, x_range[0]), min(hi_x, x_range[1])
    if y_range:
        lo_y, hi_y = max(lo_y, y_range[0]), min(hi_y, y_range[1])
    return Pose(_u(rng, lo_x, hi_x), _u(rng, lo_y, hi_y), theta)


def _disc(rng, radius: float) -> tuple[float, float]:
    r = radius * math.sqrt(rng.uniform())
    ang = rng.uniform(0, 2 * math.pi)
    return r * math.cos(ang), r * math.sin(ang)


def sample_arity(kind: RelationKind, rng) -> int:
    a = kind.object_arity
    if a.is_fixed:
        return a.min
    return int(rng.integers(a.min, min(a.min + 6, a.max) + 1))


def _draw_shape(rng, w_max=SHAPE_MAX, l_max=SHAPE_MAX) -> BoundingBox:
    return BoundingBox(_u(rng, SHAPE_MIN, max(SHAPE_MIN + 1e-6, w_max)), _u(rng, SHAPE_MIN, max(SHAPE_MIN + 1e-6, l_max)))


def _line_caps(container: Container, n: int, axis: int) -> float:
    """Largest per-object extent so n objects fit on a spaced line along `axis`."""
    span = (container.x_extent if axis == 0 else container.y_extent) - 2 * PAD
    return max(SHAPE_MIN + 1e-6, span / (1.1 * (n - 1) + 1.0)) if n > 1 else SHAPE_MAX


def sample_inputs(name: str, container: Container, rng, k: int | None = None):
    """Draw (shapes, context) from the relation's shape prior; poses left to the builder."""
    name = canonical_name(name)
    kind = lookup(name)
    n = k if k is not None else sample_arity(kind, rng)
    if not kind.object_arity.accepts(n):
        raise ValidationError(f"{name}: arity {n} outside {kind.object_arity.min}..{kind.object_arity.max}")

    context = None
    if name == "on-top-of":
        lower = BoundingBox(_u(rng, 0.3, SHAPE_MAX), _u(rng, 0.3, SHAPE_MAX))
        upper = BoundingBox(lower.width * _u(rng, 0.25, 0.6), lower.length * _u(rng, 0.25, 0.6))
        shapes = (upper, lower)
    elif name in ("aligned-in-horizontal-line-bottom", "aligned-in-horizontal-line-centroid",
                  "contiguously-aligned", "height-sorted-ascending", "height-sorted-descending",
                  "width-sorted-ascending", "width-sorted-descending"):
        cap = min(SHAPE_MAX, _line_caps(container, n, axis=0))
        shapes = tuple(_draw_shape(rng, w_max=cap, l_max=min(SHAPE_MAX, container.y_extent / 3)) for _ in range(n))
    elif name == "aligned-in-vertical-line-centroid":
        cap = min(SHAPE_MAX, _line_caps(container, n, axis=1))
        shapes = tuple(_draw_shape(rng, w_max=min(SHAPE_MAX, container.x_extent / 3), l_max=cap) for _ in range(n))
    elif name == "regular-grid":
        rows, cols = _grid_dims(n)
        w_cap = min(SHAPE_MAX, _line_caps(container, cols, axis=0))
        l_cap = min(SHAPE_MAX, _line_caps(container, rows, axis=1))
        shapes = tuple(_draw_shape(rng, w_max=w_cap, l_max=l_cap) for _ in range(n))
    else:
        shapes = tuple(_draw_shape(rng) for _ in range(n))

    if name == "reachable":
        base_y = container.y_min if rng.uniform() < 0.5 else container.y_max
        base = (_u(rng, container.x_min + 0.3, container.x_max - 0.3), base_y)
        radius_m = float(rng.choice(REACH_LEVELS_M))
        context = ReachContext(base, radius_m / container.meters_per_unit)
    elif name == "under-window":
        span = _u(rng, 0.3, 0.6) * container.x_extent
        mid = _u(rng, container.x_min + span / 2, container.x_max - span / 2)
        context = Feature("window", (mid - span / 2, container.y_max), (mid + span / 2, container.y_max))
    return shapes, context


def sample_shapes(name: str, container: Container, rng, k: int | None = None):
    return sample_inputs(name, container, rng, k)


def _grid_dims(n: int) -> tuple[int, int]:
    rows = 1
    for d in range(1, int(math.isqrt(n)) + 1):
        if n % d == 0:
            rows = d
    return rows, n // rows


# --- per-relation pose builders ---------------------------------------------


def _build_unary(name, container, shapes, rng):
    w = container.width
    cx, cy = container.center
    bbox = shapes[0]

    if name == "central-column":
        band = CENTRAL_BAND_FRAC * container.x_extent * MARGIN
        return [_inside_pose(rng, container, bbox, x_range=(cx - band, cx + band))]
    if name == "central-row":
        band = CENTRAL_BAND_FRAC * container.y_extent * MARGIN
        return [_inside_pose(rng, container, bbox, y_range=(cy - band, cy + band))]
    if name == "at-center":
        dx, dy = _disc(rng, CENTER_TOL_FRAC * w * MARGIN)
        return [Pose(cx + dx, cy + dy, 0.0)]
    if name in ("left-half", "right-half", "front-half", "back-half"):
        off = 0.02 * w
        ranges = {
            "left-half": {"x_range": (container.x_min, cx - off)},
            "right-half": {"x_range": (cx + off, container.x_max)},
            "front-half": {"y_range": (container.y_min, cy - off)},
            "back-half": {"y_range": (cy + off, container.y_max)},
        }[name]
        return [_inside_pose(rng, container, bbox, **ranges)]
    if name.startswith("near-") and name.endswith("-edge"):
        return [_edge_pose(rng, container, bbox, name[5:-5], EDGE_NEAR_FRAC * w * MARGIN)]
    if name == "facing-front":
        theta = _u(rng, -FACING_TOL * MARGIN, FACING_TOL * MARGIN)
        return [_inside_pose(rng, container, bbox, theta=theta)]
    if name == "facing-back":
        theta = wrap_angle(math.pi + _u(rng, -FACING_TOL * MARGIN, FACING_TOL * MARGIN))
        return [_inside_pose(rng, container, bbox, theta=theta)]
    if name.startswith("against-") and name.endswith("-wall"):
        return [_wall_pose(rng, container, bbox, name[8:-5])]
    if name in ("right-of-wall", "left-of-wall", "center-of-wall"):
        third = container.x_extent / 6.0
        guard = 0.02 * container.x_extent
        x_range = {
            "right-of-wall": (cx + third + guard, container.x_max),
            "left-of-wall": (container.x_min, cx - third - guard),
            "center-of-wall": (cx - third + guard, cx + third - guard),
        }[name]
        return [_wall_pose(rng, container, bbox, "back", x_range=x_range)]
    if name.startswith("at-") and name.endswith("-corner"):
        fb, lr = name[3:-7].split("-")
        tol = EDGE_NEAR_FRAC * w * MARGIN
        p1 = _edge_pose(rng, container, bbox, fb, tol)
        p2 = _edge_pose(rng, container, bbox, lr, tol)
        return [Pose(p2.x, p1.y, 0.0)]
    raise ValidationError(f"no builder for {name!r}")


def _edge_pose(rng, container, bbox, edge, tol, theta=0.0) -> Pose:
    hx, hy = _rot_half_extents(bbox, theta)
    d = _u(rng, 0.005, tol)
    if edge == "front":
        return Pose(_u(rng, container.x_min + hx + PAD, container.x_max - hx - PAD), container.y_min + d + hy, theta)
    if edge == "back":
        return Pose(_u(rng, container.x_min + hx + PAD, container.x_max - hx - PAD), container.y_max - d - hy, theta)
    if edge == "left":
        return Pose(container.x_min + d + hx, _u(rng, container.y_min + hy + PAD, container.y_max - hy - PAD), theta)
    if edge == "right":
        return Pose(container.x_max - d - hx, _u(rng, container.y_min + hy + PAD, container.y_max - hy - PAD), theta)
    raise ValidationError(f"unknown edge {edge!r}")


def _wall_pose(rng, container, bbox, wall, x_range=None) -> Pose:
    w = container.width
    jitter = _u(rng, -0.4, 0.4) * (math.pi / 12)
    if wall in ("back", "front"):
        theta = wrap_angle((0.0 if rng.uniform() < 0.5 else math.pi) + jitter)
    else:
        theta = wrap_angle((math.pi / 2 if rng.uniform() < 0.5 else -math.pi / 2) + jitter)
    hx, hy = _rot_half_extents(bbox, theta)
    d = _u(rng, 0.0, WALL_DIST_FRAC * w * MARGIN)
    lo_x, hi_x = container.x_min + hx + PAD, container.x_max - hx - PAD
    if x_range:
        lo_x, hi_x = max(lo_x, x_range[0]), min(hi_x, x_range[1])
    lo_y, hi_y = container.y_min + hy + PAD, container.y_max - hy - PAD
    if wall == "back":
        return Pose(_u(rng, lo_x, hi_x), container.y_max - d - hy, theta)
    if wall == "front":
        return Pose(_u(rng, lo_x, hi_x), container.y_min + d + hy, theta)
    if wall == "left":
        return Pose(container.x_min + d + hx, _u(rng, lo_y, hi_y), theta)
    return Pose(container.x_max - d - hx, _u(rng, lo_y, hi_y), theta)


def _beside(rng, container, shapes, axis: int, gap_lo: float, gap_hi: float):
    """First object immediately before the second along axis (left-of / in-front-of).

    The pair midpoint is drawn uniformly so neither object carries a sideways
    positional bias; biased marginals would give composed chains a systematic
    drift along the axis.
    """
    a, b = shapes
    gap = _u(rng, gap_lo, gap_hi)
    if axis == 0:
        span = a.width + gap + b.width
        mid = _u(rng, container.x_min + span / 2 + PAD, container.x_max - span / 2 - PAD)
        delta = _u(rng, -0.4, 0.4) * max(a.length, b.length) / 2
        pb = _inside_pose(
            rng, container, b,
            x_range=(mid + span / 2 - b.width / 2, mid + span / 2 - b.width / 2),
        )
        pa = Pose(mid - span / 2 + a.width / 2, pb.y + delta, 0.0)
    else:
        span = a.length + gap + b.length
        mid = _u(rng, container.y_min + span / 2 + PAD, container.y_max - span / 2 - PAD)
        delta = _u(rng, -0.4, 0.4) * max(a.width, b.width) / 2
        pb = _inside_pose(
            rng, container, b,
            y_range=(mid + span / 2 - b.length / 2, mid + span / 2 - b.length / 2),
        )
        pa = Pose(pb.x + delta, mid - span / 2 + a.length / 2, 0.0)
    if not _fits(container, a, pa):
        raise _Retry
    return [pa, pb]


def _fits(container, bbox, pose) -> bool:
    x0, x1, y0, y1 = obb_aabb(bbox, pose)
    return (
        x0 >= container.x_min and x1 <= container.x_max and y0 >= container.y_min and y1 <= container.y_max
    )


def _build_binary(name, container, shapes, rng, context):
    w = container.width
    cx, cy = container.center

    if name == "horizontally-aligned-bottom":
        jit = ALIGN_TOL_FRAC * w * MARGIN / 2
        base_l = max(s.length for s in shapes)
        y_b = _u(rng, container.y_min + PAD, container.y_max - base_l - PAD)
        poses = []
        for s in shapes:
            x = _u(rng, container.x_min + s.width / 2 + PAD, container.x_max - s.width / 2 - PAD)
            poses.append(Pose(x, y_b + s.length / 2 + _u(rng, -jit, jit), 0.0))
        return poses
    if name == "horizontally-aligned-centroid":
        jit = ALIGN_TOL_FRAC * w * MARGIN / 2
        y0 = _u(rng, container.y_min + max(s.length for s in shapes) / 2 + PAD,
                container.y_max - max(s.length for s in shapes) / 2 - PAD)
        return [
            Pose(_u(rng, container.x_min + s.width / 2 + PAD, container.x_max - s.width / 2 - PAD),
                 y0 + _u(rng, -jit, jit), 0.0)
            for s in shapes
        ]
    if name == "vertically-aligned-centroid":
        jit = ALIGN_TOL_FRAC * w * MARGIN / 2
        x0 = _u(rng, container.x_min + max(s.width for s in shapes) / 2 + PAD,
                container.x_max - max(s.width for s in shapes) / 2 - PAD)
        return [
            Pose(x0 + _u(rng, -jit, jit),
                 _u(rng, container.y_min + s.length / 2 + PAD, container.y_max - s.length / 2 - PAD), 0.0)
            for s in shapes
        ]
    if name in ("horizontal-symmetry-on-table", "vertical-symmetry-on-table"):
        theta_a = _u(rng, -FACING_TOL * MARGIN, FACING_TOL * MARGIN)
        dx, dy = _disc(rng, SYM_POS_TOL_FRAC * w * 0.3)
        if name == "vertical-symmetry-on-table":
            pa = _inside_pose(rng, container, shapes[0], theta=theta_a, x_range=(container.x_min, cx - 0.05))
            pb = Pose(2 * cx - pa.x + dx, pa.y + dy, -theta_a)
        else:
            pa = _inside_pose(rng, container, shapes[0], theta=theta_a, y_range=(container.y_min, cy - 0.05))
            pb = Pose(pa.x + dx, 2 * cy - pa.y + dy, wrap_angle(math.pi - theta_a))
        if not _fits(container, shapes[1], pb):
            raise _Retry
        return [pa, pb]
    if name == "left-of":
        return _beside(rng, container, shapes, 0, 0.01 * w, GAP_MAX_FRAC * w * MARGIN)
    if name == "right-of":
        pb, pa = _beside(rng, container, list(reversed(shapes)), 0, 0.01 * w, GAP_MAX_FRAC * w * MARGIN)
        return [pa, pb]
    if name == "left-touching":
        return _beside(rng, container, shapes, 0, 0.001 * w, TOUCH_GAP_FRAC * w * MARGIN)
    if name == "right-touching":
        pb, pa = _beside(rng, container, list(reversed(shapes)), 0, 0.001 * w, TOUCH_GAP_FRAC * w * MARGIN)
        return [pa, pb]
    if name == "in-front-of":
        return _beside(rng, container, shapes, 1, 0.01 * w, GAP_MAX_FRAC * w * MARGIN)
    if name == "on-top-of":
        upper, lower = shapes
        slack_x = (lower.width - upper.width) / 2
        slack_y = (lower.length - upper.length) / 2
        if slack_x <= 0 or slack_y <= 0:
            raise GenerationBudgetError(
                f"on-top-of: upper box {upper.width:.3f}x{upper.length:.3f} does not fit inside lower"
            )
        radius = 0.3 * min(slack_x, slack_y, CENTERED_TOL_FRAC * w * MARGIN)
        pb = _inside_pose(rng, container, lower)
        dx, dy = _disc(rng, radius)
        return [Pose(pb.x + dx, pb.y + dy, 0.0), pb]
    if name == "centered":
        pb = _inside_pose(rng, container, shapes[1])
        dx, dy = _disc(rng, CENTERED_TOL_FRAC * w * MARGIN)
        pa = Pose(pb.x + dx, pb.y + dy, 0.0)
        if not _fits(container, shapes[0], pa):
            raise _Retry
        return [pa, pb]
    if name == "under-window":
        window: Feature = context
        lo, hi = sorted((window.start[0], window.end[0]))
        shrink = 0.1 * (hi - lo)
        return [_wall_pose(rng, container, shapes[0], "back", x_range=(lo + shrink, hi - shrink))]
    raise ValidationError(f"no builder for {name!r}")


def _build_ternary(name, container, shapes, rng):
    w = container.width
    axis_shape, a_shape, b_shape = shapes
    theta_a = _u(rng, -FACING_TOL * MARGIN, FACING_TOL * MARGIN)
    dxj, dyj = _disc(rng, SYM_POS_TOL_FRAC * w * 0.3)
    p_axis = _inside_pose(rng, container, axis_shape)
    if name == "vertical-symmetry-about-axis-obj":
        d = _u(rng, 0.1, 0.8)
        pa = Pose(p_axis.x - d, p_axis.y + _u(rng, -0.4, 0.4), theta_a)
        pb = Pose(2 * p_axis.x - pa.x + dxj, pa.y + dyj, -theta_a)
    else:
        d = _u(rng, 0.1, 0.6)
        pa = Pose(p_axis.x + _u(rng, -0.6, 0.6), p_axis.y - d, theta_a)
        pb = Pose(pa.x + dxj, 2 * p_axis.y - pa.y + dyj, wrap_angle(math.pi - theta_a))
    if not (_fits(container, a_shape, pa) and _fits(container, b_shape, pb)):
        raise _Retry
    return [p_axis, pa, pb]


def _line_poses(rng, container, shapes, axis: int, use_bottom: bool):
    """Evenly spaced line along `axis` with small positional jitter."""
    w = container.width
    n = len(shapes)
    jit_aligned = ALIGN_TOL_FRAC * w * MARGIN / 2
    if axis == 0:
        max_w = max(s.width for s in shapes)
        lo = container.x_min + max_w / 2 + PAD
        hi = container.x_max - max_w / 2 - PAD
        d_lo, d_hi = 1.05 * max_w, (hi - lo) / (n - 1) if n > 1 else 0.0
        # bias toward wider spacing: the 20% relative spacing tolerance scales with it
        d = _u(rng, d_lo + 0.4 * (d_hi - d_lo), d_hi) if n > 1 else 0.0
        anchor = _u(rng, lo, hi - (n - 1) * d)
        max_l = max(s.length for s in shapes)
        if use_bottom:
            y_b = _u(rng, container.y_min + PAD, container.y_max - max_l - PAD)
            ys = [y_b + s.length / 2 + _u(rng, -jit_aligned, jit_aligned) for s in shapes]
        else:
            y0 = _u(rng, container.y_min + max_l / 2 + PAD, container.y_max - max_l / 2 - PAD)
            ys = [y0 + _u(rng, -jit_aligned, jit_aligned) for _ in shapes]
        xs = [anchor + i * d + _u(rng, -0.03, 0.03) * d for i in range(n)]
        return [Pose(x, y, 0.0) for x, y in zip(xs, ys)]
    max_l = max(s.length for s in shapes)
    lo = container.y_min + max_l / 2 + PAD
    hi = container.y_max - max_l / 2 - PAD
    d_lo, d_hi = 1.05 * max_l, (hi - lo) / (n - 1) if n > 1 else 0.0
    d = _u(rng, d_lo + 0.4 * (d_hi - d_lo), d_hi) if n > 1 else 0.0
    anchor = _u(rng, lo, hi - (n - 1) * d)
    max_w = max(s.width for s in shapes)
    x0 = _u(rng, container.x_min + max_w / 2 + PAD, container.x_max - max_w / 2 - PAD)
    xs = [x0 + _u(rng, -jit_aligned, jit_aligned) for _ in shapes]
    ys = [anchor + i * d + _u(rng, -0.03, 0.03) * d for i in range(n)]
    return [Pose(x, y, 0.0) for x, y in zip(xs, ys)]


def _build_variadic(name, container, shapes, rng):
    w = container.width
    n = len(shapes)

    if name == "aligned-in-horizontal-line-bottom":
        return _line_poses(rng, container, shapes, 0, use_bottom=True)
    if name == "aligned-in-horizontal-line-centroid":
        return _line_poses(rng, container, shapes, 0, use_bottom=False)
    if name == "aligned-in-vertical-line-centroid":
        return _line_poses(rng, container, shapes, 1, use_bottom=False)
    if name == "regular-grid":
        rows, cols = _grid_dims(n)
        jit = 0.25 * GRID_RESIDUAL_FRAC * w
        max_w = max(s.width for s in shapes)
        max_l = max(s.length for s in shapes)
        lo_x, hi_x = container.x_min + max_w / 2 + PAD, container.x_max - max_w / 2 - PAD
        lo_y, hi_y = container.y_min + max_l / 2 + PAD, container.y_max - max_l / 2 - PAD
        dx = _u(rng, 1.05 * max_w, (hi_x - lo_x) / (cols - 1)) if cols > 1 else 0.0
        dy = _u(rng, 1.05 * max_l, (hi_y - lo_y) / (rows - 1)) if rows > 1 else 0.0
        ox = _u(rng, lo_x, hi_x - (cols - 1) * dx)
        oy = _u(rng, lo_y, hi_y - (rows - 1) * dy)
        poses = []
        for i in range(n):
            r, c = divmod(i, cols)
            poses.append(Pose(ox + c * dx + _u(rng, -jit, jit), oy + r * dy + _u(rng, -jit, jit), 0.0))
        return poses
    if name == "contiguously-aligned":
        total = sum(s.width for s in shapes) + (n - 1) * TOUCH_GAP_FRAC * w
        if total > container.x_extent - 2 * PAD:
            raise _Retry
        max_l = max(s.length for s in shapes)
        y_b = _u(rng, container.y_min + PAD, container.y_max - max_l - PAD)
        x = _u(rng, container.x_min + PAD, container.x_max - PAD - total) + shapes[0].width / 2
        jit = ALIGN_TOL_FRAC * w * MARGIN / 2
        poses = []
        for i, s in enumerate(shapes):
            poses.append(Pose(x, y_b + s.length / 2 + _u(rng, -jit, jit), 0.0))
            if i + 1 < n:
                x += s.width / 2 + shapes[i + 1].width / 2 + _u(rng, 0.001 * w, TOUCH_GAP_FRAC * w * MARGIN)
        return poses
    raise ValidationError(f"no builder for {name!r}")


def _build_sorted(name, container, shapes, rng):
    """Sorted relations reorder a drawn shape list; poses go left-to-right in arg order."""
    extent_index = 1 if name.startswith("height") else 0
    ascending = name.endswith("ascending")
    key = (lambda s: s.length) if extent_index else (lambda s: s.width)
    ordered = sorted(shapes, key=key, reverse=not ascending)
    vals = [key(s) for s in ordered]
    if any(abs(b - a) < 1e-6 for a, b in zip(vals, vals[1:])):
        raise _Retry  # strict monotonicity needs distinct extents
    poses = _line_poses(rng, container, ordered, 0, use_bottom=True)
    if any(b.x <= a.x for a, b in zip(poses, poses[1:])):
        raise _Retry
    return ordered, poses


def _build_reachable(container, shapes, rng, context: ReachContext):
    bx, by = context.base
    for _ in range(200):
        dx, dy = _disc(rng, REACH_MARGIN * context.radius_units)
        pose = Pose(bx + dx, by + dy, 0.0)
        if _fits(container, shapes[0], pose):
            return [pose]
    raise _Retry


def build_example(name: str, container: Container, rng, shapes=None, k: int | None = None) -> SynthExample:
    """One positive example; raises GenerationBudgetError when infeasible."""
    name = canonical_name(name)
    kind = lookup(name)
    budget = TRY_BUDGET
    while budget > 0:
        budget -= 1
        try:
            if shapes is None:
                drawn, context = sample_inputs(name, container, rng, k)
            else:
                drawn = tuple(shapes)
                _, context = sample_inputs(name, container, rng, len(drawn))
                if name == "on-top-of":
                    u, lo = drawn
                    if u.width >= lo.width or u.length >= lo.length:
                        raise GenerationBudgetError("on-top-of: provided shapes cannot nest")
            if kind.arity.is_fixed and kind.object_arity.min == 1:
                if name == "reachable":
                    poses = _build_reachable(container, drawn, rng, context)
                elif name == "under-window":
                    poses = _build_binary(name, container, drawn, rng, context)
                else:
                    poses = _build_unary(name, container, drawn, rng)
            elif name in ("height-sorted-ascending", "height-sorted-descending",
                          "width-sorted-ascending", "width-sorted-descending"):
                drawn, poses = _build_sorted(name, container, list(drawn), rng)
            elif kind.object_arity.min == 2 and kind.object_arity.is_fixed:
                poses = _build_binary(name, container, drawn, rng, context)
            elif kind.object_arity.is_fixed and kind.object_arity.min == 3:
                poses = _build_ternary(name, container, drawn, rng)
            else:
                poses = _build_variadic(name, container, drawn, rng)
        except _Retry:
            continue
        example = SynthExample(name, tuple(drawn), tuple(poses), context)
        if classify(name, container, example.shapes, example.poses, context):
            return example
    raise GenerationBudgetError(f"could not build a positive example for {name!r} within {TRY_BUDGET} tries")


def sample_positive(name: str, container: Container, rng, n: int = 1, shapes=None) -> list[SynthExample]:
    """n positive examples; variadic relations mix arities when shapes are not given."""
    if n < 1:
        raise ValidationError("n must be >= 1")
    return [build_example(name, container, rng, shapes=shapes) for _ in range(n)]


def write_dataset(examples, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for ex in examples:
            fh.write(json.dumps(ex.to_record()) + "\n")


def read_dataset(path) -> list[SynthExample]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(SynthExample.from_record(json.loads(line)))
    return out
