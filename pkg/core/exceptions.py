"""
Exception hierarchy shared by every app of the project.

The CLI maps the three families below onto process exit codes:
validation failures exit 2, numerical failures exit 3, I/O failures exit 4.
"""
from typing import Any, Dict, Optional, Tuple


class ScaleInferenceError(Exception):
    """Base class for all project errors."""
    exit_code = 1

    def __init__(self, message: str, **context: Any) -> None:
        super().__init__(message)
        self.message = message
        self.context: Dict[str, Any] = context

    def as_record(self) -> Dict[str, Any]:
        """Machine-readable record written to stderr by the CLI."""
        record: Dict[str, Any] = {
            'error': type(self).__name__,
            'message': self.message,
            'exit_code': self.exit_code,
        }
        record.update(self.context)
        return record


class ValidationError(ScaleInferenceError):
    """A parameter set failed validation before dispatch."""
    exit_code = 2


class DomainError(ScaleInferenceError, ValueError):
    """An argument lies outside the domain of a numeric operation."""
    exit_code = 2


class NumericalError(ScaleInferenceError):
    """Base class for numeric failures (non-convergence and friends)."""
    exit_code = 3


class ConvergenceError(NumericalError):
    """An iteration or a quadrature did not reach its tolerance."""

    def __init__(self, message: str, residual: Optional[float] = None, **context: Any) -> None:
        super().__init__(message, residual=residual, **context)
        self.residual = residual


class TruncationError(NumericalError):
    """A truncated series leaves a tail larger than allowed."""

    def __init__(self, message: str, tail_bound: float, **context: Any) -> None:
        super().__init__(message, tail_bound=tail_bound, **context)
        self.tail_bound = tail_bound


class BracketError(NumericalError):
    """The score has no sign change on the bracket."""

    def __init__(
        self,
        message: str,
        bracket: Tuple[float, float],
        scores: Tuple[float, float],
        **context: Any
    ) -> None:
        super().__init__(message, bracket=list(bracket), scores=list(scores), **context)
        self.bracket = bracket
        self.scores = scores


class NonUnimodalError(NumericalError):
    """A three-point test found an interior local minimum."""

    def __init__(self, message: str, triple: Tuple[float, float, float], **context: Any) -> None:
        super().__init__(message, triple=list(triple), **context)
        self.triple = triple


class DegenerateDataError(NumericalError):
    """The data carry no information for the requested estimator."""


class BoundaryError(NumericalError):
    """The likelihood is maximised on the boundary of the parameter set."""


class OutputError(ScaleInferenceError):
    """Reading or writing a file failed."""
    exit_code = 4
