"""Exception hierarchy shared by the analytic, simulation and CLI layers."""

from typing import Optional


class ParisdivError(Exception):
    """Base class for every error raised by parisdiv."""


class InvalidArgumentError(ParisdivError, ValueError):
    """A precondition on an argument is violated."""


class ConvergenceError(ParisdivError, ArithmeticError):
    """An iterative numerical routine did not reach its tolerance.

    Attributes:
        best_estimate: last value produced before giving up
        error_estimate: the routine's own error estimate for it
    """

    def __init__(
        self, message: str, best_estimate: float, error_estimate: float = float("nan")
    ) -> None:
        super().__init__(message)
        self.best_estimate = best_estimate
        self.error_estimate = error_estimate


class UnsupportedModelError(ParisdivError):
    """The model does not satisfy a structural requirement (e.g. net profit)."""


class IllPosedBoundaryError(ParisdivError, ArithmeticError):
    """The linear equation for the value at the barrier degenerates."""


class InternalConsistencyError(ParisdivError, AssertionError):
    """A quantity that cannot fail mathematically failed numerically."""


class ConfigError(ParisdivError, ValueError):
    """Invalid run configuration.

    Attributes:
        key: dotted key of the offending entry, if known
        line: 1-based source line, if known
    """

    def __init__(
        self, message: str, key: Optional[str] = None, line: Optional[int] = None
    ) -> None:
        where = ""
        if key is not None:
            where += f" [{key}]"
        if line is not None:
            where += f" (line {line})"
        super().__init__(message + where)
        self.key = key
        self.line = line
