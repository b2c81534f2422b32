"""Rule-based classifiers for the spatial relations.

Every rule is a deterministic geometric test over 2D bounding boxes and
poses in the container frame.  Tolerances are fractions of the container
reference width W (the y extent, 2.0 on the default table), so rules are
invariant under uniform rescaling of container + poses + shapes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..geometry import (
    BoundingBox,
    Container,
    Feature,
    Pose,
    Scene,
    ValidationError,
    obb_aabb,
    obb_inside_obb,
    wrap_angle,
)
from .graphs import GroundingGraph
from .registry import canonical_name, lookup

# tolerance fractions of W = container y extent
EDGE_NEAR_FRAC = 0.10
CENTRAL_BAND_FRAC = 0.25  # half-width of the central band, fraction of the axis length
CENTER_TOL_FRAC = 0.05
FACING_TOL = math.pi / 12
WALL_DIST_FRAC = 0.03
WALL_ANGLE_TOL = math.pi / 12
GAP_MAX_FRAC = 0.15
PERP_OVERLAP_MIN = 0.5
TOUCH_GAP_FRAC = 0.01
CENTERED_TOL_FRAC = 0.05
ALIGN_TOL_FRAC = 0.03
SYM_POS_TOL_FRAC = 0.05
SYM_ANGLE_TOL = math.pi / 12
SPACING_REL_TOL = 0.20
GRID_RESIDUAL_FRAC = 0.05


@dataclass(frozen=True)
class ReachContext:
    """Conditioning for the reachability relation: arm base and radius (table units)."""

    base: tuple[float, float]
    radius_units: float


def _angle_diff(a: float, b: float) -> float:
    return abs(wrap_angle(a - b))


def _axis_angle_diff(theta: float, target_mod_pi: float) -> float:
    """Distance between orientations identified modulo pi (boxes are centrally symmetric)."""
    d = math.fmod(theta - target_mod_pi, math.pi)
    if d < 0:
        d += math.pi
    return min(d, math.pi - d)


def _overlap_len(lo_a, hi_a, lo_b, hi_b) -> float:
    return min(hi_a, hi_b) - max(lo_a, lo_b)


def _directed_gap(shapes, poses, axis: int) -> tuple[float, float]:
    """(gap, perpendicular overlap fraction) for 'first immediately below second on axis'.

    axis 0: first to the left of second; axis 1: first in front of second.
    Overlap fraction is relative to the smaller perpendicular extent.
    """
    a = obb_aabb(shapes[0], poses[0])
    b = obb_aabb(shapes[1], poses[1])
    if axis == 0:
        gap = b[0] - a[1]
        ov = _overlap_len(a[2], a[3], b[2], b[3])
        denom = min(a[3] - a[2], b[3] - b[2])
    else:
        gap = b[2] - a[3]
        ov = _overlap_len(a[0], a[1], b[0], b[1])
        denom = min(a[1] - a[0], b[1] - b[0])
    return gap, ov / denom if denom > 0 else 0.0


def _side_by_side(shapes, poses, axis: int, w: float, max_gap_frac: float) -> bool:
    gap, frac = _directed_gap(shapes, poses, axis)
    return 0.0 <= gap <= max_gap_frac * w and frac >= PERP_OVERLAP_MIN


def _mirrored(pa: Pose, pb: Pose, mirror_x: float | None, mirror_y: float | None, w: float) -> bool:
    """Centroid + orientation mirror test across a vertical (mirror_x) or horizontal line."""
    if mirror_x is not None:
        mx, my = 2.0 * mirror_x - pa.x, pa.y
        theta_m = -pa.theta
    else:
        mx, my = pa.x, 2.0 * mirror_y - pa.y
        theta_m = math.pi - pa.theta
    if math.hypot(mx - pb.x, my - pb.y) > SYM_POS_TOL_FRAC * w:
        return False
    return _angle_diff(pb.theta, theta_m) <= SYM_ANGLE_TOL


def _spacing_uniform(coords: list[float]) -> bool:
    if len(coords) < 3:
        return True
    srt = sorted(coords)
    gaps = [srt[i + 1] - srt[i] for i in range(len(srt) - 1)]
    mean = sum(gaps) / len(gaps)
    if mean <= 0:
        return False
    return max(abs(g - mean) for g in gaps) <= SPACING_REL_TOL * mean


def _line_aligned(shapes, poses, w: float, line_axis: int, use_bottom: bool) -> bool:
    """Collinear along line_axis (0 = horizontal line) with uniform centroid spacing."""
    if line_axis == 0:
        aligned = [obb_aabb(s, p)[2] if use_bottom else p.y for s, p in zip(shapes, poses)]
        spacing = [p.x for p in poses]
    else:
        aligned = [p.x for p in poses]
        spacing = [p.y for p in poses]
    if max(aligned) - min(aligned) > ALIGN_TOL_FRAC * w:
        return False
    return _spacing_uniform(spacing)


def _equal_partition_centers(values: list[float], groups: int) -> tuple[list[float], list[int]]:
    """Sort values into `groups` contiguous equal-size clusters; return centers + assignment."""
    n = len(values)
    size = n // groups
    order = sorted(range(n), key=lambda i: values[i])
    centers = []
    assign = [0] * n
    for g in range(groups):
        members = order[g * size : (g + 1) * size]
        centers.append(sum(values[i] for i in members) / size)
        for i in members:
            assign[i] = g
    return centers, assign


def _regular_grid(shapes, poses, w: float) -> bool:
    n = len(poses)
    xs = [p.x for p in poses]
    ys = [p.y for p in poses]
    tol = GRID_RESIDUAL_FRAC * w
    for rows in range(1, n + 1):
        if n % rows:
            continue
        cols = n // rows
        row_centers, row_of = _equal_partition_centers(ys, rows)
        col_centers, col_of = _equal_partition_centers(xs, cols)
        residual = max(
            math.hypot(xs[i] - col_centers[col_of[i]], ys[i] - row_centers[row_of[i]])
            for i in range(n)
        )
        if residual <= tol:
            return True
    return False


def _contiguous(shapes, poses, w: float) -> bool:
    bottoms = [obb_aabb(s, p)[2] for s, p in zip(shapes, poses)]
    if max(bottoms) - min(bottoms) > ALIGN_TOL_FRAC * w:
        return False
    boxes = sorted((obb_aabb(s, p) for s, p in zip(shapes, poses)), key=lambda b: b[0])
    for left, right in zip(boxes, boxes[1:]):
        gap = right[0] - left[1]
        # interpenetration beyond the touching tolerance also rejected
        if abs(gap) > TOUCH_GAP_FRAC * w:
            return False
    return True


def _sorted_line(shapes, poses, w: float, extent_index: int, ascending: bool) -> bool:
    """Bottom-aligned line whose bbox extent is strictly monotone in argument order."""
    if not _line_aligned(shapes, poses, w, line_axis=0, use_bottom=True):
        return False
    xs = [p.x for p in poses]
    if any(b <= a for a, b in zip(xs, xs[1:])):
        return False  # argument order must be the left-to-right order
    extents = [(s.width, s.length)[extent_index] for s in shapes]
    if not ascending:
        extents = extents[::-1]
    return all(b > a for a, b in zip(extents, extents[1:]))


def _wall_of_segment(container: Container, feature: Feature) -> str:
    """Which container edge a segment hugs (nearest edge by endpoint distance)."""
    dists = {
        "front": max(abs(feature.start[1] - container.y_min), abs(feature.end[1] - container.y_min)),
        "back": max(abs(feature.start[1] - container.y_max), abs(feature.end[1] - container.y_max)),
        "left": max(abs(feature.start[0] - container.x_min), abs(feature.end[0] - container.x_min)),
        "right": max(abs(feature.start[0] - container.x_max), abs(feature.end[0] - container.x_max)),
    }
    return min(dists, key=dists.get)


def _against_wall(container: Container, bbox: BoundingBox, pose: Pose, wall: str) -> bool:
    w = container.width
    x0, x1, y0, y1 = obb_aabb(bbox, pose)
    if wall == "back":
        dist, target = container.y_max - y1, 0.0
    elif wall == "front":
        dist, target = y0 - container.y_min, 0.0
    elif wall == "left":
        dist, target = x0 - container.x_min, math.pi / 2
    elif wall == "right":
        dist, target = container.x_max - x1, math.pi / 2
    else:
        raise ValidationError(f"unknown wall {wall!r}")
    return abs(dist) <= WALL_DIST_FRAC * w and _axis_angle_diff(pose.theta, target) <= WALL_ANGLE_TOL


def _near_edge(container: Container, bbox: BoundingBox, pose: Pose, edge: str) -> bool:
    w = container.width
    x0, x1, y0, y1 = obb_aabb(bbox, pose)
    dist = {
        "front": y0 - container.y_min,
        "back": container.y_max - y1,
        "left": x0 - container.x_min,
        "right": container.x_max - x1,
    }[edge]
    return abs(dist) <= EDGE_NEAR_FRAC * w


def classify(name: str, container: Container, shapes, poses, context=None) -> bool:
    """Evaluate one relation rule on object shapes + poses (feature args via `context`)."""
    name = canonical_name(name)
    kind = lookup(name)
    if len(shapes) != len(poses):
        raise ValidationError(f"{name}: {len(shapes)} shapes for {len(poses)} poses")
    if not kind.object_arity.accepts(len(shapes)):
        raise ValidationError(
            f"{name}: arity {len(shapes)} outside {kind.object_arity.min}..{kind.object_arity.max}"
        )

    w = container.width
    cx, cy = container.center

    # --- unary, container-relative ---
    if name == "central-column":
        return abs(poses[0].x - cx) <= CENTRAL_BAND_FRAC * container.x_extent
    if name == "central-row":
        return abs(poses[0].y - cy) <= CENTRAL_BAND_FRAC * container.y_extent
    if name == "at-center":
        return math.hypot(poses[0].x - cx, poses[0].y - cy) <= CENTER_TOL_FRAC * w
    if name == "left-half":
        return poses[0].x < cx
    if name == "right-half":
        return poses[0].x > cx
    if name == "front-half":
        return poses[0].y < cy
    if name == "back-half":
        return poses[0].y > cy
    if name.startswith("near-") and name.endswith("-edge"):
        return _near_edge(container, shapes[0], poses[0], name[5:-5])
    if name == "facing-front":
        return abs(wrap_angle(poses[0].theta)) <= FACING_TOL
    if name == "facing-back":
        return _angle_diff(poses[0].theta, math.pi) <= FACING_TOL
    if name.startswith("against-") and name.endswith("-wall"):
        return _against_wall(container, shapes[0], poses[0], name[8:-5])
    if name in ("right-of-wall", "left-of-wall", "center-of-wall"):
        if not _against_wall(container, shapes[0], poses[0], "back"):
            return False
        third = container.x_extent / 6.0
        if name == "right-of-wall":
            return poses[0].x > cx + third
        if name == "left-of-wall":
            return poses[0].x < cx - third
        return abs(poses[0].x - cx) <= third
    if name.startswith("at-") and name.endswith("-corner"):
        front_back, left_right = name[3:-7].split("-")
        return _near_edge(container, shapes[0], poses[0], front_back) and _near_edge(
            container, shapes[0], poses[0], left_right
        )

    # --- binary ---
    if name == "horizontally-aligned-bottom":
        b0 = obb_aabb(shapes[0], poses[0])[2]
        b1 = obb_aabb(shapes[1], poses[1])[2]
        return abs(b0 - b1) <= ALIGN_TOL_FRAC * w
    if name == "horizontally-aligned-centroid":
        return abs(poses[0].y - poses[1].y) <= ALIGN_TOL_FRAC * w
    if name == "vertically-aligned-centroid":
        return abs(poses[0].x - poses[1].x) <= ALIGN_TOL_FRAC * w
    if name == "horizontal-symmetry-on-table":
        return _mirrored(poses[0], poses[1], None, cy, w)
    if name == "vertical-symmetry-on-table":
        return _mirrored(poses[0], poses[1], cx, None, w)
    if name == "left-of":
        return _side_by_side(shapes, poses, 0, w, GAP_MAX_FRAC)
    if name == "right-of":
        return _side_by_side(list(reversed(shapes)), list(reversed(poses)), 0, w, GAP_MAX_FRAC)
    if name == "left-touching":
        return _side_by_side(shapes, poses, 0, w, TOUCH_GAP_FRAC)
    if name == "right-touching":
        return _side_by_side(list(reversed(shapes)), list(reversed(poses)), 0, w, TOUCH_GAP_FRAC)
    if name == "in-front-of":
        return _side_by_side(shapes, poses, 1, w, GAP_MAX_FRAC)
    if name == "on-top-of":
        d = math.hypot(poses[0].x - poses[1].x, poses[0].y - poses[1].y)
        if d > CENTERED_TOL_FRAC * w:
            return False
        return obb_inside_obb(shapes[0], poses[0], shapes[1], poses[1])
    if name == "centered":
        d = math.hypot(poses[0].x - poses[1].x, poses[0].y - poses[1].y)
        return d <= CENTERED_TOL_FRAC * w
    if name == "under-window":
        if not isinstance(context, Feature):
            raise ValidationError("under-window needs a window segment as context")
        wall = _wall_of_segment(container, context)
        if not _against_wall(container, shapes[0], poses[0], wall):
            return False
        if wall in ("front", "back"):
            lo, hi = sorted((context.start[0], context.end[0]))
            return lo <= poses[0].x <= hi
        lo, hi = sorted((context.start[1], context.end[1]))
        return lo <= poses[0].y <= hi

    # --- ternary: (axis object, A, B) ---
    if name == "vertical-symmetry-about-axis-obj":
        return _mirrored(poses[1], poses[2], poses[0].x, None, w)
    if name == "horizontal-symmetry-about-axis-obj":
        return _mirrored(poses[1], poses[2], None, poses[0].y, w)

    # --- variadic ---
    if name == "aligned-in-horizontal-line-bottom":
        return _line_aligned(shapes, poses, w, 0, use_bottom=True)
    if name == "aligned-in-horizontal-line-centroid":
        return _line_aligned(shapes, poses, w, 0, use_bottom=False)
    if name == "aligned-in-vertical-line-centroid":
        return _line_aligned(shapes, poses, w, 1, use_bottom=False)
    if name == "regular-grid":
        return _regular_grid(shapes, poses, w)
    if name == "contiguously-aligned":
        return _contiguous(shapes, poses, w)
    if name == "height-sorted-ascending":
        return _sorted_line(shapes, poses, w, 1, ascending=True)
    if name == "height-sorted-descending":
        return _sorted_line(shapes, poses, w, 1, ascending=False)
    if name == "width-sorted-ascending":
        return _sorted_line(shapes, poses, w, 0, ascending=True)
    if name == "width-sorted-descending":
        return _sorted_line(shapes, poses, w, 0, ascending=False)

    if name == "reachable":
        if not isinstance(context, ReachContext):
            raise ValidationError("reachable needs a ReachContext (arm base + radius)")
        d = math.hypot(poses[0].x - context.base[0], poses[0].y - context.base[1])
        return d <= context.radius_units

    raise ValidationError(f"no rule implemented for relation {name!r}")


def literal_context(lit, scene: Scene, reach_radius_m: float | None = None):
    """Resolve a literal's feature argument into the classifier context."""
    feature_name = lit.feature_arg()
    if feature_name is None:
        return None
    feature = scene.container.feature(feature_name)
    if lit.relation == "reachable":
        radius_m = reach_radius_m if reach_radius_m is not None else lit.kind().params["radius_m"]
        return ReachContext(feature.midpoint(), radius_m / scene.container.meters_per_unit)
    return feature


def check_graph(graph: GroundingGraph, scene: Scene, poses, reach_radius_m: float | None = None) -> list[bool]:
    """Per-literal satisfaction, in graph order."""
    results = []
    for lit in graph:
        idx = [scene.index_of(a) for a in lit.object_args()]
        sub_shapes = [scene.objects[i].bbox for i in idx]
        sub_poses = [poses[i] for i in idx]
        ctx = literal_context(lit, scene, reach_radius_m)
        results.append(classify(lit.relation, scene.container, sub_shapes, sub_poses, ctx))
    return results
