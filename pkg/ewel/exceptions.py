"""Error hierarchy for the laboratory, each carrying the exit code the CLI reports."""

from typing import Any, Dict, Optional


class EwelError(Exception):
    """Base error: an exit code, a human-readable detail and optional location data."""

    exit_code: int = 3

    def __init__(
        self,
        detail: Any = None,
        context: Optional[Dict[str, Any]] = None,
        exit_code: Optional[int] = None,
    ) -> None:
        if exit_code is not None:
            self.exit_code = exit_code
        self.detail = detail
        self.context = context or {}
        super().__init__(detail)

    def __reduce__(self):
        # subclasses with other __init__ signatures must still unpickle in worker results
        return _restore, (type(self), self.args, self.__dict__)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "error": type(self).__name__,
            "exit_code": self.exit_code,
            "detail": str(self.detail),
            "context": self.context,
        }


def _restore(cls, args, state):
    err = cls.__new__(cls)
    err.args = args
    err.__dict__.update(state)
    return err


class ConfigurationError(EwelError):
    """Invalid configuration: unknown model, unresolved quadrature, bad geometry."""

    exit_code = 2


class ArgumentError(EwelError, ValueError):
    """Argument outside the domain of a pure evaluator."""

    exit_code = 2


class NumericalFault(EwelError):
    """Non-finite state or integrand, non-SPD covariance, degenerate fit or plot."""

    exit_code = 3


class MemoryBudgetError(NumericalFault):
    """A requested buffer exceeds the configured memory budget."""

    def __init__(self, requested_bytes: int, budget_bytes: int) -> None:
        self.requested_bytes = requested_bytes
        self.budget_bytes = budget_bytes
        super().__init__(
            f"requested {requested_bytes} bytes exceeds budget of {budget_bytes} bytes",
            context={"requested_bytes": requested_bytes, "budget_bytes": budget_bytes},
        )


class AcceptanceMiss(EwelError):
    """An experiment finished but missed one of its acceptance thresholds."""

    exit_code = 1
