"""Exception types shared across the package."""


class MvLoewnerError(Exception):
    """Base class for all errors raised by this package."""


class GridError(MvLoewnerError, ValueError):
    """Invalid grid data (duplicate points, shape mismatch, bad values)."""


class OffGridError(GridError):
    """A requested coordinate is not a stored grid point."""


class ExpressionError(MvLoewnerError, ValueError):
    """Syntax or validation error while parsing an expression.

    ``position`` is the 0-based character offset where the error was found.
    """

    def __init__(self, message, position=None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


class EvaluationError(MvLoewnerError, ArithmeticError):
    """Expression evaluation failed (division by zero, missing variable)."""


class MemoryGuardError(MvLoewnerError, MemoryError):
    """A dense matrix build was refused because it would exceed the guard."""

    def __init__(self, estimated_bytes, limit_bytes):
        super().__init__(
            f"refusing dense build: estimated {estimated_bytes} bytes "
            f"exceeds guard of {limit_bytes} bytes"
        )
        self.estimated_bytes = estimated_bytes
        self.limit_bytes = limit_bytes


class DegenerateNullspaceError(MvLoewnerError, RuntimeError):
    """A null-space computation was ambiguous or empty.

    ``context`` describes the sub-problem (frozen variable combination) in
    which the degeneracy appeared, when applicable.
    """

    def __init__(self, message, context=None):
        super().__init__(message)
        self.context = context


class PoleError(MvLoewnerError, ArithmeticError):
    """Evaluation hit a pole (vanishing barycentric denominator)."""


class NotConvergedError(MvLoewnerError, RuntimeError):
    """Adaptive fitting exhausted its point budget above tolerance.

    Carries the best model and iteration log produced before giving up.
    """

    def __init__(self, message, best_model=None, log=None):
        super().__init__(message)
        self.best_model = best_model
        self.log = log
