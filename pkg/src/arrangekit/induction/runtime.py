"""Executing induced programs: the call_LLM primitive and graph extraction."""

from __future__ import annotations

import json
import re

from ..errors import ValidationError
from ..relations.graphs import GroundingGraph, GroundLiteral
from ..relations.registry import canonical_name, relation_names
from .client import ChatRequest
from .interp import Interpreter, Program

JSON_CONTRACT = (
    "Respond with a single JSON object of the form {\"answer\": <value>} and nothing else; "
    "<value> must follow the output format above."
)


def parse_json_answer(text: str):
    """Extract the `answer` value from a (possibly fenced) JSON response."""
    cleaned = text.strip()
    fenced = re.search(r"```(?:json)?\s*(.*?)```", cleaned, flags=re.DOTALL)
    if fenced:
        cleaned = fenced.group(1).strip()
    start = cleaned.find("{")
    end = cleaned.rfind("}")
    if start == -1 or end == -1 or end <= start:
        raise ValidationError(f"response is not a JSON object: {text[:80]!r}")
    doc = json.loads(cleaned[start : end + 1])
    if "answer" not in doc:
        raise ValidationError("JSON response lacks an 'answer' key")
    return doc["answer"]


def build_llm_prompt(question: str, examples: str, output_format: str) -> str:
    """Three-part prompt (question / examples / output format) + JSON contract."""
    return (
        f"Question: {question}\n\n"
        f"Examples or explanation:\n{examples}\n\n"
        f"Output format: {output_format}\n\n"
        f"{JSON_CONTRACT}"
    )


def make_call_llm(client):
    """The call_LLM primitive bound to a transport client."""

    def call_llm(question, examples, output_format):
        prompt = build_llm_prompt(str(question), str(examples), str(output_format))
        response = client.complete(ChatRequest.user(prompt, model=getattr(client, "model", "default")))
        return parse_json_answer(response)

    return call_llm


def relations_to_graph(raw, object_ids: list[str], function: str = "main") -> GroundingGraph:
    """Convert a program's relation tuples into a validated grounding graph."""
    if not isinstance(raw, (list, tuple)):
        raise ValidationError(f"{function}: program returned {type(raw).__name__}, expected a list of relations")
    known = set(relation_names())
    ids = set(object_ids)
    literals = []
    for pos, row in enumerate(raw):
        if not isinstance(row, (list, tuple)) or len(row) < 2:
            raise ValidationError(f"{function}: relation #{pos} is not [name, arg, ...]: {row!r}")
        name = canonical_name(str(row[0]))
        args = tuple(str(a) for a in row[1:])
        if name not in known:
            raise ValidationError(f"{function}: relation #{pos} uses unknown relation {row[0]!r}")
        for a in args:
            if a not in ids:
                raise ValidationError(f"{function}: relation #{pos} ({name}) names unknown object {a!r}")
        literals.append(GroundLiteral(name, args))
    return GroundingGraph(tuple(literals))


def execute_program(
    program: Program,
    desc: str,
    object_ids: list[str],
    client=None,
    force: bool = False,
    statuses: dict[str, str] | None = None,
) -> GroundingGraph:
    """Run the program on (instruction, object ids) and return its grounding graph.

    `statuses` (function -> "passed"/"failed"/"unverified") guards execution:
    unverified or failed functions are refused unless `force` is set.
    """
    if not object_ids:
        raise ValidationError("empty object list")
    if len(set(object_ids)) != len(object_ids):
        raise ValidationError("duplicate object ids")
    if statuses and not force:
        bad = sorted(name for name, st in statuses.items() if st != "passed")
        if bad:
            raise ValidationError(f"functions not verified: {bad} (use force to run anyway)")
    call_llm = make_call_llm(client) if client is not None else None
    interp = Interpreter(program, call_llm=call_llm)
    raw = interp.run_main(desc, list(object_ids))
    return relations_to_graph(raw, object_ids, program.main)
