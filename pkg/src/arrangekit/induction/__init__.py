from .taskspec import Section, TaskSpec, parse_spec
from .client import (
    ChatRequest,
    LiveClient,
    RecordingClient,
    ReplayClient,
    Transcript,
    request_digest,
)
from .interp import Interpreter, Program, ProgramError, RestrictedFunction, parse_function
from .runtime import execute_program, make_call_llm
from .pipeline import (
    Example,
    FunctionImpl,
    ProgramSketch,
    SketchEntry,
    VerificationLog,
    generate_code,
    generate_sketch,
    induce_program,
    verify,
    load_examples,
)
from .reference import reference_program

__all__ = [
    "Section",
    "TaskSpec",
    "parse_spec",
    "ChatRequest",
    "LiveClient",
    "RecordingClient",
    "ReplayClient",
    "Transcript",
    "request_digest",
    "Interpreter",
    "Program",
    "ProgramError",
    "RestrictedFunction",
    "parse_function",
    "execute_program",
    "make_call_llm",
    "Example",
    "FunctionImpl",
    "ProgramSketch",
    "SketchEntry",
    "VerificationLog",
    "generate_code",
    "generate_sketch",
    "induce_program",
    "verify",
    "load_examples",
    "reference_program",
]
