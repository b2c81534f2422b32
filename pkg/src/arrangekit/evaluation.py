"""Rule-based scoring of arrangements: physical feasibility and functionality."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ValidationError
from .geometry import Scene, contains, obb_overlap
from .relations.classifiers import check_graph
from .relations.graphs import GroundingGraph


@dataclass(frozen=True)
class EvalReport:
    feasibility: float
    functionality: float
    collisions: tuple[tuple[str, str], ...]
    per_literal: tuple[bool, ...]

    def to_json(self) -> dict:
        return {
            "feasibility": float(self.feasibility),
            "functionality": float(self.functionality),
            "collisions": [list(pair) for pair in self.collisions],
            "per_literal": [bool(v) for v in self.per_literal],
        }


def _designated_region_ok(scene: Scene, i: int, poses) -> bool:
    """Inside the container; when compartments exist, inside one of them."""
    obj = scene.objects[i]
    if scene.container.compartments:
        return any(contains(comp, obj.bbox, poses[i]) for comp in scene.container.compartments)
    return contains(scene.container.rect(), obj.bbox, poses[i])


def feasibility_score(scene: Scene, poses, stacked: set[frozenset[str]] | None = None):
    """Fraction of objects that are collision-free and inside their region.

    `stacked` holds unordered id pairs declared as intentional stacking
    (on-top-of literals); those pairs are exempt from collision counting.
    Returns (fraction, sorted collision pairs).
    """
    if len(poses) != len(scene.objects):
        raise ValidationError(f"{len(poses)} poses for {len(scene.objects)} objects")
    stacked = stacked or set()
    n = len(scene.objects)
    colliding = [False] * n
    pairs = []
    for i in range(n):
        for j in range(i + 1, n):
            if frozenset((scene.objects[i].id, scene.objects[j].id)) in stacked:
                continue
            if obb_overlap(scene.objects[i].bbox, poses[i], scene.objects[j].bbox, poses[j]):
                colliding[i] = colliding[j] = True
                pairs.append((scene.objects[i].id, scene.objects[j].id))
    feasible = sum(
        1 for i in range(n) if not colliding[i] and _designated_region_ok(scene, i, poses)
    )
    return (feasible / n if n else 1.0), sorted(pairs)


def functionality_score(graph: GroundingGraph, scene: Scene, poses, reach_radius_m=None) -> float:
    """Mean literal satisfaction; an empty graph scores 1.0 by convention."""
    flags = check_graph(graph, scene, poses, reach_radius_m)
    return sum(flags) / len(flags) if flags else 1.0


def evaluate(scene: Scene, poses, graph: GroundingGraph | None = None, reach_radius_m=None) -> EvalReport:
    graph = graph if graph is not None else GroundingGraph(())
    feas, pairs = feasibility_score(scene, poses, stacked=graph.stacked_pairs())
    flags = tuple(check_graph(graph, scene, poses, reach_radius_m))
    func = sum(flags) / len(flags) if flags else 1.0
    return EvalReport(
        feasibility=feas,
        functionality=func,
        collisions=tuple(pairs),
        per_literal=flags,
    )
