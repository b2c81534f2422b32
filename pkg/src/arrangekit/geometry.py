"""Canonical frame, 2D object geometry and pose normalization.

Everything downstream (classifiers, diffusion models, metrics, rendering)
works in one canonical container frame: x grows to the right, y grows toward
the back edge, theta = 0 faces the front edge.  All functions here are pure.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ValidationError

TWO_PI = 2.0 * math.pi


def wrap_angle(theta: float) -> float:
    """Canonicalize an angle into [-pi, pi)."""
    wrapped = math.fmod(theta + math.pi, TWO_PI)
    if wrapped < 0:
        wrapped += TWO_PI
    return wrapped - math.pi


@dataclass(frozen=True)
class BoundingBox:
    """Axis extents of an object in its local frame (width along x, length along y)."""

    width: float
    length: float

    def __post_init__(self):
        if not (self.width > 0 and self.length > 0):
            raise ValidationError(f"bounding box extents must be positive, got {self.width}x{self.length}")


@dataclass(frozen=True)
class Pose:
    """Planar pose (x, y, theta) in the container frame, theta in [-pi, pi)."""

    x: float
    y: float
    theta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "theta", wrap_angle(self.theta))

    def xy(self) -> np.ndarray:
        return np.array([self.x, self.y], dtype=float)


@dataclass(frozen=True)
class ObjectSpec:
    id: str
    category: str
    bbox: BoundingBox

    def __post_init__(self):
        if not self.id:
            raise ValidationError("object id must be non-empty")
        if not self.category:
            raise ValidationError(f"object {self.id!r} has empty category")


def category_of(object_id: str) -> str:
    """Default category: the id with a trailing _<digits> counter stripped."""
    stem, _, suffix = object_id.rpartition("_")
    if stem and suffix.isdigit():
        return stem
    return object_id


@dataclass(frozen=True)
class Feature:
    """Named axis-aligned segment on the container (window, door, arm base...).

    Point features (robot-arm bases) are degenerate segments with start == end.
    """

    name: str
    start: tuple[float, float]
    end: tuple[float, float]

    @property
    def is_point(self) -> bool:
        return self.start == self.end

    def midpoint(self) -> tuple[float, float]:
        return ((self.start[0] + self.end[0]) / 2.0, (self.start[1] + self.end[1]) / 2.0)


@dataclass(frozen=True)
class Rect:
    x_min: float
    x_max: float
    y_min: float
    y_max: float
    name: str = ""

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValidationError(f"degenerate rectangle {self}")

    @property
    def center(self) -> tuple[float, float]:
        return ((self.x_min + self.x_max) / 2.0, (self.y_min + self.y_max) / 2.0)

    @property
    def x_extent(self) -> float:
        return self.x_max - self.x_min

    @property
    def y_extent(self) -> float:
        return self.y_max - self.y_min

    def contains_point(self, x: float, y: float) -> bool:
        return self.x_min <= x <= self.x_max and self.y_min <= y <= self.y_max


@dataclass(frozen=True)
class Container:
    """The reference region (table top, shelf face, room floor plan).

    The default extents are the 3x2 dining table with origin at the center;
    the front edge is y_min.  `meters_per_unit` sets the physical scale used
    by the reachability relation (0.6 m/unit makes the default table 1.8 m
    by 1.2 m).
    """

    x_min: float = -1.5
    x_max: float = 1.5
    y_min: float = -1.0
    y_max: float = 1.0
    features: tuple[Feature, ...] = ()
    compartments: tuple[Rect, ...] = ()
    meters_per_unit: float = 0.6

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValidationError("container extents are degenerate")
        for f in self.features:
            for px, py in (f.start, f.end):
                if not self.rect().contains_point(px, py):
                    raise ValidationError(f"feature {f.name!r} lies outside the container")
        for c in self.compartments:
            if c.x_min < self.x_min or c.x_max > self.x_max or c.y_min < self.y_min or c.y_max > self.y_max:
                raise ValidationError(f"compartment {c.name!r} lies outside the container")

    def rect(self) -> Rect:
        return Rect(self.x_min, self.x_max, self.y_min, self.y_max)

    @property
    def center(self) -> tuple[float, float]:
        return ((self.x_min + self.x_max) / 2.0, (self.y_min + self.y_max) / 2.0)

    @property
    def x_extent(self) -> float:
        return self.x_max - self.x_min

    @property
    def y_extent(self) -> float:
        return self.y_max - self.y_min

    @property
    def width(self) -> float:
        """The tolerance reference W (the y extent; 2.0 on the default table)."""
        return self.y_max - self.y_min

    def feature(self, name: str) -> Feature:
        for f in self.features:
            if f.name == name:
                return f
        raise ValidationError(f"container has no feature named {name!r}")

    def feature_names(self) -> set[str]:
        return {f.name for f in self.features}


@dataclass(frozen=True)
class Scene:
    container: Container
    objects: tuple[ObjectSpec, ...]
    poses: tuple[Pose, ...] | None = None
    frozen: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        ids = [o.id for o in self.objects]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise ValidationError(f"duplicate object ids: {dupes}")
        if self.poses is not None and len(self.poses) != len(self.objects):
            raise ValidationError(f"{len(self.poses)} poses for {len(self.objects)} objects")
        unknown = set(self.frozen) - set(ids)
        if unknown:
            raise ValidationError(f"frozen ids not in scene: {sorted(unknown)}")

    def index_of(self, object_id: str) -> int:
        for i, o in enumerate(self.objects):
            if o.id == object_id:
                return i
        raise ValidationError(f"unknown object id {object_id!r}")

    def object_ids(self) -> list[str]:
        return [o.id for o in self.objects]

    def shapes(self) -> list[BoundingBox]:
        return [o.bbox for o in self.objects]

    def with_poses(self, poses) -> "Scene":
        return replace(self, poses=tuple(poses))


# ---------------------------------------------------------------------------
# Oriented bounding boxes


def obb_corners(bbox: BoundingBox, pose: Pose) -> np.ndarray:
    """Corners of the rotated rectangle, counter-clockwise, as a (4, 2) array."""
    hw, hl = bbox.width / 2.0, bbox.length / 2.0
    local = np.array([[-hw, -hl], [hw, -hl], [hw, hl], [-hw, hl]])
    c, s = math.cos(pose.theta), math.sin(pose.theta)
    rot = np.array([[c, -s], [s, c]])
    return local @ rot.T + np.array([pose.x, pose.y])


def obb_aabb(bbox: BoundingBox, pose: Pose) -> tuple[float, float, float, float]:
    """Axis-aligned bounds (x_min, x_max, y_min, y_max) of the rotated box."""
    hx = abs(bbox.width / 2.0 * math.cos(pose.theta)) + abs(bbox.length / 2.0 * math.sin(pose.theta))
    hy = abs(bbox.width / 2.0 * math.sin(pose.theta)) + abs(bbox.length / 2.0 * math.cos(pose.theta))
    return pose.x - hx, pose.x + hx, pose.y - hy, pose.y + hy


_SAT_EPS = 1e-12


def obb_overlap(bbox_a: BoundingBox, pose_a: Pose, bbox_b: BoundingBox, pose_b: Pose) -> bool:
    """True iff the two box *interiors* intersect (separating-axis test).

    Boxes that merely touch along an edge or corner count as non-overlapping,
    so flush placements (touching relations) are not penalized as collisions.
    """
    ca = obb_corners(bbox_a, pose_a)
    cb = obb_corners(bbox_b, pose_b)
    for theta in (pose_a.theta, pose_b.theta):
        c, s = math.cos(theta), math.sin(theta)
        for axis in ((c, s), (-s, c)):
            pa = ca @ axis
            pb = cb @ axis
            if pa.max() <= pb.min() + _SAT_EPS or pb.max() <= pa.min() + _SAT_EPS:
                return False  # separated on this axis
    return True


def _separation_gap(bbox_a, pose_a, bbox_b, pose_b) -> float:
    """Largest signed gap over the four SAT axes (positive = separated)."""
    ca = obb_corners(bbox_a, pose_a)
    cb = obb_corners(bbox_b, pose_b)
    best = -math.inf
    for theta in (pose_a.theta, pose_b.theta):
        c, s = math.cos(theta), math.sin(theta)
        for axis in ((c, s), (-s, c)):
            pa = ca @ axis
            pb = cb @ axis
            gap = max(pb.min() - pa.max(), pa.min() - pb.max())
            best = max(best, gap)
    return best


def points_in_obb(points: np.ndarray, bbox: BoundingBox, pose: Pose, strict: bool = False) -> np.ndarray:
    """Boolean mask of which (N, 2) points lie inside the box (closed by default)."""
    c, s = math.cos(pose.theta), math.sin(pose.theta)
    rel = points - np.array([pose.x, pose.y])
    # inverse rotation into the box frame
    lx = rel[:, 0] * c + rel[:, 1] * s
    ly = -rel[:, 0] * s + rel[:, 1] * c
    hw, hl = bbox.width / 2.0, bbox.length / 2.0
    if strict:
        return (np.abs(lx) < hw) & (np.abs(ly) < hl)
    return (np.abs(lx) <= hw) & (np.abs(ly) <= hl)


def contains(region: Rect, bbox: BoundingBox, pose: Pose) -> bool:
    """True iff all four corners of the box lie inside the closed rectangle."""
    corners = obb_corners(bbox, pose)
    return bool(
        (corners[:, 0] >= region.x_min).all()
        and (corners[:, 0] <= region.x_max).all()
        and (corners[:, 1] >= region.y_min).all()
        and (corners[:, 1] <= region.y_max).all()
    )


def obb_inside_obb(inner_bbox, inner_pose, outer_bbox, outer_pose) -> bool:
    """True iff the inner box's corners all lie within the outer (closed) box."""
    corners = obb_corners(inner_bbox, inner_pose)
    return bool(points_in_obb(corners, outer_bbox, outer_pose).all())


# ---------------------------------------------------------------------------
# Pose normalization for the diffusion models


def normalize_poses(container: Container, poses) -> np.ndarray:
    """Encode poses as (x_n, y_n, sin theta, cos theta) rows, x_n/y_n in [0, 1].

    Values leave [0, 1] for out-of-range poses; that is permitted (the
    diffusion chain passes through such states).
    """
    out = np.empty((len(poses), 4), dtype=np.float64)
    for i, p in enumerate(poses):
        out[i, 0] = (p.x - container.x_min) / container.x_extent
        out[i, 1] = (p.y - container.y_min) / container.y_extent
        out[i, 2] = math.sin(p.theta)
        out[i, 3] = math.cos(p.theta)
    return out


def denormalize_poses(container: Container, vec: np.ndarray) -> list[Pose]:
    """Exact inverse of :func:`normalize_poses` on in-range vectors.

    The (sin, cos) pair is projected to the unit circle before the angle is
    recovered, so slightly off-manifold vectors (raw diffusion output) are
    accepted; a degenerate all-zero pair maps to theta = 0.
    """
    poses = []
    for row in np.asarray(vec, dtype=np.float64):
        x = container.x_min + float(row[0]) * container.x_extent
        y = container.y_min + float(row[1]) * container.y_extent
        s, c = float(row[2]), float(row[3])
        if s == 0.0 and c == 0.0:
            theta = 0.0
        else:
            theta = math.atan2(s, c)
        poses.append(Pose(float(x), float(y), theta))
    return poses


def normalize_shapes(container: Container, bboxes) -> np.ndarray:
    """Shape features (w_n, l_n), each extent scaled by the matching container axis."""
    out = np.empty((len(bboxes), 2), dtype=np.float64)
    for i, b in enumerate(bboxes):
        out[i, 0] = b.width / container.x_extent
        out[i, 1] = b.length / container.y_extent
    return out


# ---------------------------------------------------------------------------
# Scene JSON (object-keyed format with optional "_meta" entry)


def scene_to_json(scene: Scene) -> dict:
    doc: dict = {}
    poses = scene.poses if scene.poses is not None else [Pose(0.0, 0.0, 0.0)] * len(scene.objects)
    for obj, pose in zip(scene.objects, poses):
        entry = {
            "dimension": [obj.bbox.width, obj.bbox.length],
            "pose": [pose.x, pose.y, pose.theta],
            "name": obj.id,
        }
        if obj.category != category_of(obj.id):
            entry["category"] = obj.category
        doc[obj.id] = entry
    meta: dict = {}
    if scene.container != Container():
        c = scene.container
        meta["container"] = {
            "x_min": c.x_min,
            "x_max": c.x_max,
            "y_min": c.y_min,
            "y_max": c.y_max,
            "meters_per_unit": c.meters_per_unit,
            "features": [
                {"name": f.name, "start": list(f.start), "end": list(f.end)} for f in c.features
            ],
            "compartments": [
                {"name": r.name, "x_min": r.x_min, "x_max": r.x_max, "y_min": r.y_min, "y_max": r.y_max}
                for r in c.compartments
            ],
        }
    if scene.frozen:
        meta["frozen"] = sorted(scene.frozen)
    if scene.poses is None:
        meta["has_poses"] = False
    if meta:
        doc["_meta"] = meta
    return doc


def scene_from_json(doc: dict) -> Scene:
    if not isinstance(doc, dict):
        raise ValidationError("scene document must be a JSON object")
    meta = doc.get("_meta", {})
    container = Container()
    if "container" in meta:
        c = meta["container"]
        container = Container(
            x_min=float(c.get("x_min", -1.5)),
            x_max=float(c.get("x_max", 1.5)),
            y_min=float(c.get("y_min", -1.0)),
            y_max=float(c.get("y_max", 1.0)),
            meters_per_unit=float(c.get("meters_per_unit", 0.6)),
            features=tuple(
                Feature(f["name"], tuple(f["start"]), tuple(f["end"])) for f in c.get("features", [])
            ),
            compartments=tuple(
                Rect(r["x_min"], r["x_max"], r["y_min"], r["y_max"], r.get("name", ""))
                for r in c.get("compartments", [])
            ),
        )
    objects: list[ObjectSpec] = []
    poses: list[Pose] = []
    for key, entry in doc.items():
        if key == "_meta":
            continue
        if not isinstance(entry, dict) or "dimension" not in entry:
            raise ValidationError(f"scene entry {key!r} is not an object record")
        w, l = entry["dimension"]
        objects.append(
            ObjectSpec(id=key, category=entry.get("category", category_of(key)), bbox=BoundingBox(float(w), float(l)))
        )
        pose = entry.get("pose", [0.0, 0.0, 0.0])
        poses.append(Pose(float(pose[0]), float(pose[1]), float(pose[2])))
    has_poses = meta.get("has_poses", True)
    return Scene(
        container=container,
        objects=tuple(objects),
        poses=tuple(poses) if has_poses else None,
        frozen=frozenset(meta.get("frozen", ())),
    )


def load_scene(path) -> Scene:
    with open(path, encoding="utf-8") as fh:
        return scene_from_json(json.load(fh))


def save_scene(scene: Scene, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(scene_to_json(scene), fh, indent=2)
        fh.write("\n")
