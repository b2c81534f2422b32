"""Shared exception types; the CLI maps each class to a distinct exit code."""


class ValidationError(ValueError):
    """Input violates a documented invariant (bad scene, graph, arity, ...)."""


class NumericError(RuntimeError):
    """Non-finite values during training or sampling; aborts with diagnostics."""


class ClientError(RuntimeError):
    """LLM transport failure (network, auth, malformed response)."""


class ReplayMissError(ClientError):
    """Replay transcript has no entry for the request digest."""
