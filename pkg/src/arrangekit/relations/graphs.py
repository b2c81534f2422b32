"""Ground spatial-relation literals and the grounding graph over a scene."""

from __future__ import annotations

import json
from dataclasses import dataclass

from ..geometry import Scene, ValidationError
from .registry import RelationKind, canonical_name, lookup


@dataclass(frozen=True)
class GroundLiteral:
    relation: str
    args: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "relation", canonical_name(self.relation))
        object.__setattr__(self, "args", tuple(self.args))
        if len(set(self.args)) != len(self.args):
            raise ValidationError(f"literal {self.key()} repeats an argument")

    def key(self) -> tuple:
        return (self.relation, *self.args)

    def kind(self) -> RelationKind:
        return lookup(self.relation)

    def object_args(self) -> tuple[str, ...]:
        """Arguments that name scene objects (feature arguments stripped)."""
        k = self.kind()
        return self.args[: len(self.args) - k.feature_args]

    def feature_arg(self) -> str | None:
        k = self.kind()
        return self.args[-1] if k.feature_args else None


@dataclass(frozen=True)
class GroundingGraph:
    literals: tuple[GroundLiteral, ...]

    def __post_init__(self):
        # duplicates removed, first occurrence wins
        seen = set()
        unique = []
        for lit in self.literals:
            if lit.key() not in seen:
                seen.add(lit.key())
                unique.append(lit)
        object.__setattr__(self, "literals", tuple(unique))

    def __len__(self) -> int:
        return len(self.literals)

    def __iter__(self):
        return iter(self.literals)

    def relations(self) -> set[str]:
        return {lit.relation for lit in self.literals}

    def mentioned_objects(self) -> set[str]:
        out: set[str] = set()
        for lit in self.literals:
            out.update(lit.object_args())
        return out

    def stacked_pairs(self) -> set[frozenset[str]]:
        """Unordered object pairs declared as intentionally stacked."""
        return {
            frozenset(lit.args[:2]) for lit in self.literals if lit.relation == "on-top-of"
        }


def validate_literal(lit: GroundLiteral, scene: Scene) -> list[str]:
    """Errors for one literal against a scene; empty list when valid."""
    errors: list[str] = []
    try:
        kind = lit.kind()
    except ValidationError as exc:
        return [str(exc)]
    if not kind.arity.accepts(len(lit.args)):
        bounds = f"{kind.arity.min}" if kind.arity.is_fixed else f"{kind.arity.min}..{kind.arity.max}"
        errors.append(f"{lit.key()}: arity {len(lit.args)} not in {bounds}")
        return errors
    ids = set(scene.object_ids())
    for arg in lit.object_args():
        if arg not in ids:
            errors.append(f"{lit.key()}: unknown object id {arg!r}")
    feature = lit.feature_arg()
    if feature is not None and feature not in scene.container.feature_names():
        errors.append(f"{lit.key()}: unknown container feature {feature!r}")
    return errors


def validate_graph_against_scene(graph: GroundingGraph, scene: Scene) -> list[str]:
    errors: list[str] = []
    for lit in graph:
        errors.extend(validate_literal(lit, scene))
    return errors


def graph_to_json(graph: GroundingGraph) -> dict:
    return {"constraints": [[lit.relation, *lit.args] for lit in graph]}


def graph_from_json(doc: dict) -> GroundingGraph:
    if not isinstance(doc, dict) or "constraints" not in doc:
        raise ValidationError('graph document must be an object with a "constraints" list')
    literals = []
    for row in doc["constraints"]:
        if not isinstance(row, (list, tuple)) or len(row) < 2:
            raise ValidationError(f"constraint {row!r} must be [relation, arg, ...]")
        literals.append(GroundLiteral(str(row[0]), tuple(str(a) for a in row[1:])))
    return GroundingGraph(tuple(literals))


def load_graph(path) -> GroundingGraph:
    with open(path, encoding="utf-8") as fh:
        return graph_from_json(json.load(fh))


def save_graph(graph: GroundingGraph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(graph_to_json(graph), fh, indent=2)
        fh.write("\n")
