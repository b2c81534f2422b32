from .registry import Arity, RelationKind, registry, lookup, relation_names
from .graphs import GroundLiteral, GroundingGraph, graph_from_json, graph_to_json, load_graph, save_graph
from .classifiers import classify, check_graph, ReachContext
from .generators import SynthExample, sample_positive, sample_shapes, GenerationBudgetError

__all__ = [
    "Arity",
    "RelationKind",
    "registry",
    "lookup",
    "relation_names",
    "GroundLiteral",
    "GroundingGraph",
    "graph_from_json",
    "graph_to_json",
    "load_graph",
    "save_graph",
    "classify",
    "check_graph",
    "ReachContext",
    "SynthExample",
    "sample_positive",
    "sample_shapes",
    "GenerationBudgetError",
]
