"""
Exception hierarchy for sparse-iscra.

Every failure the library reports on purpose is a subclass of
SparseIscraError, so the CLI can catch one type and turn it into a red
console message plus a nonzero exit code. The subclasses also inherit from
the closest built-in exception, which keeps `except ValueError` style
callers working.

Kinds:
    - InvalidArgumentError: bad dimensions, out-of-range parameters
    - UnsupportedPenaltyError: penalty outside the form an operation supports
    - BudgetExceededError: combinatorial enumeration or memory budget exceeded
    - SingularSubmatrixError: a column submatrix that must be injective is not
    - ParseError: malformed LIBSVM input (carries the 1-based line number)
    - InnerSolverError: the inner solver failed; carries the partial trace
"""

from typing import Any, Optional


class SparseIscraError(Exception):
    """Base class for all errors raised on purpose by sparse-iscra."""


class InvalidArgumentError(SparseIscraError, ValueError):
    """Argument has the wrong shape, sign or range."""


class UnsupportedPenaltyError(SparseIscraError, ValueError):
    """Penalty is valid but not of the form this operation supports."""


class BudgetExceededError(SparseIscraError, RuntimeError):
    """
    An enumeration or allocation would exceed its configured budget.

    Args:
        message: Human-readable explanation
        required: The count the operation would need (submatrices, columns, ...)
        budget: The configured limit
    """

    def __init__(self, message: str, required: Optional[int] = None, budget: Optional[int] = None):
        super().__init__(message)
        self.required = required
        self.budget = budget


class SingularSubmatrixError(SparseIscraError, ArithmeticError):
    """A column submatrix that must have full column rank does not."""


class ParseError(SparseIscraError, ValueError):
    """
    Malformed input file.

    Args:
        message: What went wrong
        line_number: 1-based line number of the offending line
    """

    def __init__(self, message: str, line_number: Optional[int] = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class InnerSolverError(SparseIscraError, RuntimeError):
    """
    The inner convex solver failed inside an outer loop.

    The outer driver attaches whatever trace it had built so far so callers
    can still inspect the completed iterations.
    """

    def __init__(self, message: str, partial_trace: Any = None):
        super().__init__(message)
        self.partial_trace = partial_trace
