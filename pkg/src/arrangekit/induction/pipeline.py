"""The program induction pipeline: sketch generation, coding, verification.

Every stage talks to an LLM through the client abstraction, so the whole
pipeline runs live (HTTP) or replayed (transcript) without code changes.
The verifier revises sketch doc text only; implementations are always
regenerated by the coder from the revised sketch (never patched in place).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from importlib import resources

from ..errors import ClientError, ValidationError
from .client import ChatRequest
from .interp import Program, ProgramError, RestrictedFunction, parse_function
from .taskspec import Section, TaskSpec

MAX_ATTEMPTS = 3


@dataclass(frozen=True)
class SketchEntry:
    name: str
    signature: str
    doc: str
    kind: str  # "data" | "pattern" | "step" | "main"
    section_title: str = ""

    def render(self) -> str:
        body = '    """' + self.doc + '"""\n    pass\n'
        return f"def {self.signature}:\n{body}"


@dataclass
class ProgramSketch:
    entries: list[SketchEntry]
    main: SketchEntry

    def titles(self) -> list[str]:
        return [e.name for e in self.entries]


@dataclass
class FunctionImpl:
    name: str
    function: RestrictedFunction
    status: str = "unverified"  # unverified | passed | failed
    attempts: int = 0


@dataclass
class Example:
    desc: str
    objects: list[str]
    target_constraints: list[list[str]] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"desc": self.desc, "objects": self.objects, "constraints": self.target_constraints}

    @staticmethod
    def from_json(doc: dict) -> "Example":
        return Example(
            desc=doc["desc"],
            objects=list(doc["objects"]),
            target_constraints=[list(c) for c in doc.get("constraints", [])],
        )


def load_examples(path) -> list[Example]:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    return [Example.from_json(e) for e in doc["examples"]]


@dataclass
class VerificationLog:
    records: list[dict] = field(default_factory=list)

    def add(self, name: str, attempts: int, status: str) -> None:
        self.records.append({"function": name, "attempts": attempts, "status": status})

    def all_passed(self) -> bool:
        return bool(self.records) and all(r["status"] == "passed" for r in self.records)

    def to_json(self) -> list[dict]:
        return list(self.records)


def _prompt(name: str) -> str:
    return resources.files("arrangekit.induction").joinpath(f"prompts/{name}.txt").read_text(encoding="utf-8")


def _fill(template: str, **tokens: str) -> str:
    out = template
    for key, value in tokens.items():
        out = out.replace(f"<<{key.upper()}>>", value)
    return out


def extract_code_block(text: str) -> str:
    m = re.search(r"```(?:python)?\s*\n(.*?)```", text, flags=re.DOTALL)
    return (m.group(1) if m else text).strip() + "\n"


def _skeleton_to_entry(source: str, kind: str, section_title: str) -> SketchEntry:
    fn = parse_function(source)
    sig_match = re.search(r"def\s+\w+\s*\((.*?)\)", source, flags=re.DOTALL)
    params = sig_match.group(1).strip() if sig_match else ", ".join(fn.params)
    return SketchEntry(
        name=fn.name,
        signature=f"{fn.name}({params})",
        doc=fn.doc,
        kind=kind,
        section_title=section_title,
    )


def _ask(client, prompt: str) -> str:
    return client.complete(ChatRequest.user(prompt, model=getattr(client, "model", "default")))


def _sketch_sections(spec: TaskSpec) -> list[tuple[Section, str]]:
    """(section, kind) pairs that become sketch entries, in document order."""
    out: list[tuple[Section, str]] = []
    domain = spec.domain()
    for child in domain.children:
        title = child.title.lower()
        if "data structure" in title:
            out.append((child, "data"))
        else:
            for pattern in child.children or [child]:
                out.append((pattern, "pattern"))
    procedural = spec.procedural()
    for step in procedural.children:
        for sub in step.children or [step]:
            out.append((sub, "step"))
    return out


def generate_sketch(spec: TaskSpec, client) -> ProgramSketch:
    """One sketch entry per procedural step and per domain pattern, plus main."""
    entries: list[SketchEntry] = []
    for section, kind in _sketch_sections(spec):
        template = _prompt(f"sketch_{kind}")
        prompt = _fill(template, title=section.title, body=section.body)
        response = _ask(client, prompt)
        entries.append(_skeleton_to_entry(extract_code_block(response), kind, section.title))
    names = [e.name for e in entries]
    if len(set(names)) != len(names):
        raise ValidationError(f"sketch maps two sections to one function name: {names}")
    main_prompt = _fill(_prompt("sketch_main"), titles="\n".join(f"- {e.signature}" for e in entries))
    main_source = extract_code_block(_ask(client, main_prompt))
    main = _skeleton_to_entry(main_source, "main", "main")
    return ProgramSketch(entries=entries, main=main)


def generate_code(entry: SketchEntry, client, helper_names: list[str] | None = None) -> FunctionImpl:
    """Coder: implement one sketch entry; up to MAX_ATTEMPTS parses of the reply."""
    helpers = ""
    if helper_names:
        helpers = "- Declared helper functions you may call: " + ", ".join(sorted(helper_names))
    base_prompt = _fill(_prompt("coder"), sketch=entry.render(), helpers=helpers)
    last_error = None
    for attempt in range(1, MAX_ATTEMPTS + 1):
        prompt = base_prompt if attempt == 1 else f"{base_prompt}\n\nAttempt {attempt}: the previous reply was invalid ({last_error}). Reply with valid restricted Python."
        response = _ask(client, prompt)
        try:
            fn = parse_function(extract_code_block(response))
        except ProgramError as exc:
            last_error = str(exc)
            continue
        if fn.name != entry.name:
            last_error = f"function name {fn.name!r} does not match sketch {entry.name!r}"
            continue
        if not fn.doc and not entry.doc:
            last_error = "implementation lacks a docstring"
            continue
        return FunctionImpl(name=entry.name, function=fn)
    raise ClientError(f"coder produced no valid implementation for {entry.name} after {MAX_ATTEMPTS} attempts: {last_error}")


def _render_examples(examples: list[Example]) -> str:
    blocks = []
    for i, ex in enumerate(examples, 1):
        blocks.append(
            f"Demonstration {i}:\n"
            f"  instruction: {ex.desc}\n"
            f"  objects: {json.dumps(ex.objects)}\n"
            f"  expected constraints: {json.dumps(ex.target_constraints)}"
        )
    return "\n".join(blocks)


def verify(impl: FunctionImpl, examples: list[Example], entry: SketchEntry, client) -> tuple[bool, SketchEntry]:
    """Verifier: Pass/Fail plus a (possibly revised) sketch. Code is never edited."""
    prompt = _fill(
        _prompt("verifier"),
        sketch=entry.render(),
        code=impl.function.source,
        examples=_render_examples(examples),
    )
    response = _ask(client, prompt)
    cleaned = response.strip()
    m = re.search(r"\{.*\}", cleaned, flags=re.DOTALL)
    if not m:
        raise ClientError(f"verifier reply for {entry.name} is not JSON: {cleaned[:80]!r}")
    doc = json.loads(m.group(0))
    result = str(doc.get("result", "")).lower()
    if result == "pass":
        return True, entry
    if result != "fail":
        raise ClientError(f"verifier reply for {entry.name} has result {doc.get('result')!r}")
    revised = doc.get("revised_description")
    if not revised:
        raise ClientError(f"verifier failed {entry.name} without a revised description")
    return False, replace(entry, doc=str(revised))


def induce_program(
    spec: TaskSpec,
    examples: list[Example],
    client,
    family: str = "",
) -> tuple[Program, VerificationLog, dict[str, str]]:
    """Sketch -> per-function (code, verify)^<=3 -> assembled program.

    Returns (program, log, statuses).  Functions that exhaust their attempts
    are included with status "failed"; callers decide whether to force
    execution.
    """
    sketch = generate_sketch(spec, client)
    log = VerificationLog()
    functions: dict[str, RestrictedFunction] = {}
    statuses: dict[str, str] = {}
    helper_names = sketch.titles()
    for entry in [*sketch.entries, sketch.main]:
        current = entry
        impl = None
        passed = False
        attempts = 0
        for attempts in range(1, MAX_ATTEMPTS + 1):
            impl = generate_code(current, client, helper_names=helper_names)
            impl.attempts = attempts
            passed, current = verify(impl, examples, current, client)
            if passed:
                break
        status = "passed" if passed else "failed"
        impl.status = status
        statuses[entry.name] = status
        log.add(entry.name, attempts, status)
        functions[entry.name] = impl.function
    program = Program(functions=functions, main=sketch.main.name, family=family)
    return program, log, statuses
