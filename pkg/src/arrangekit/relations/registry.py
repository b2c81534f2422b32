"""The registry of abstract spatial relations.

48 relations over table/shelf/room scenes (24 unary, 13 binary, 2 ternary,
9 variable-arity) plus the robot-arm reachability relation.  Each entry knows
its arity, whether its rule reads the container frame, and whether trailing
arguments name container features instead of objects.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..geometry import ValidationError

VARIADIC_MAX = 16


@dataclass(frozen=True)
class Arity:
    """Fixed(k) when min == max, otherwise variadic over [min, max]."""

    min: int
    max: int

    def __post_init__(self):
        if not (1 <= self.min <= self.max):
            raise ValidationError(f"bad arity bounds {self.min}..{self.max}")

    @staticmethod
    def fixed(k: int) -> "Arity":
        return Arity(k, k)

    @staticmethod
    def variadic(min_k: int = 2) -> "Arity":
        return Arity(min_k, VARIADIC_MAX)

    @property
    def is_fixed(self) -> bool:
        return self.min == self.max

    def accepts(self, k: int) -> bool:
        return self.min <= k <= self.max


@dataclass(frozen=True)
class RelationKind:
    name: str
    arity: Arity
    needs_container: bool = False
    feature_args: int = 0  # trailing args resolved against container features
    order_sensitive: bool = False
    params: dict = field(default_factory=dict)

    @property
    def object_arity(self) -> Arity:
        """Arity counting only object arguments (features excluded)."""
        return Arity(self.arity.min - self.feature_args, self.arity.max - self.feature_args)


_UNARY = [
    "central-column", "central-row",
    "at-center", "left-half",
    "right-half", "front-half",
    "back-half", "near-left-edge",
    "near-right-edge", "near-front-edge",
    "near-back-edge", "facing-front",
    "facing-back", "against-right-wall",
    "against-left-wall", "against-front-wall",
    "against-back-wall", "right-of-wall",
    "left-of-wall", "center-of-wall",
    "at-front-left-corner", "at-front-right-corner",
    "at-back-left-corner", "at-back-right-corner",
]

_BINARY = [
    "horizontally-aligned-bottom", "horizontally-aligned-centroid",
    "vertically-aligned-centroid", "horizontal-symmetry-on-table",
    "vertical-symmetry-on-table", "left-of",
    "right-of", "on-top-of",
    "centered", "left-touching",
    "right-touching", "in-front-of",
    "under-window",
]

_TERNARY = [
    "horizontal-symmetry-about-axis-obj",
    "vertical-symmetry-about-axis-obj",
]

_VARIADIC = [
    "aligned-in-horizontal-line-bottom", "aligned-in-horizontal-line-centroid",
    "aligned-in-vertical-line-centroid", "regular-grid",
    "contiguously-aligned", "height-sorted-ascending",
    "height-sorted-descending", "width-sorted-ascending",
    "width-sorted-descending",
]

# binary/ternary relations whose rules read the container frame
_CONTAINER_RELATIVE = {
    "horizontal-symmetry-on-table",
    "vertical-symmetry-on-table",
    "under-window",
    "reachable",
}

_ORDER_SENSITIVE = {
    "height-sorted-ascending",
    "height-sorted-descending",
    "width-sorted-ascending",
    "width-sorted-descending",
}


def _build() -> dict[str, RelationKind]:
    kinds: dict[str, RelationKind] = {}

    def add(kind: RelationKind):
        if kind.name in kinds:
            raise ValidationError(f"duplicate relation name {kind.name!r}")
        kinds[kind.name] = kind

    for name in _UNARY:
        add(RelationKind(name, Arity.fixed(1), needs_container=True))
    for name in _BINARY:
        feature_args = 1 if name == "under-window" else 0
        add(RelationKind(
            name,
            Arity.fixed(2),
            needs_container=name in _CONTAINER_RELATIVE,
            feature_args=feature_args,
        ))
    for name in _TERNARY:
        add(RelationKind(name, Arity.fixed(3)))
    for name in _VARIADIC:
        add(RelationKind(name, Arity.variadic(2), order_sensitive=name in _ORDER_SENSITIVE))
    # reachability extension: (object, arm-base feature), radius is a run parameter
    add(RelationKind(
        "reachable",
        Arity.fixed(2),
        needs_container=True,
        feature_args=1,
        params={"radius_m": 0.7},
    ))
    return kinds


_REGISTRY = _build()
assert len(_REGISTRY) == 49


def registry() -> list[RelationKind]:
    """All relation kinds in stable (table) order."""
    return list(_REGISTRY.values())


def relation_names() -> list[str]:
    return list(_REGISTRY.keys())


def canonical_name(name: str) -> str:
    return name.strip().lower().replace("_", "-")


def lookup(name: str) -> RelationKind:
    kind = _REGISTRY.get(canonical_name(name))
    if kind is None:
        raise ValidationError(f"unknown relation {name!r}")
    return kind
