"""
Polynomial feature expansion

Columns are all monomials of total degree 1..p over the input columns, in
graded-lexicographic order. For two features and p = 2:

    [x1, x2, x1^2, x1*x2, x2^2]

The column count is C(d + p, p) - 1 (no bias column).
"""

import math
from itertools import combinations_with_replacement
from typing import Dict, Optional, Tuple

import numpy as np

from ..utils.config import get_section
from ..utils.errors import BudgetExceededError, InvalidArgumentError


def poly_column_count(d: int, p: int) -> int:
    """Number of monomials of degree 1..p in d variables."""
    return math.comb(d + p, p) - 1


def poly_expand(A: np.ndarray, p: int, max_columns: Optional[int] = None) -> np.ndarray:
    """
    Expand the columns of A into all monomials up to degree p.

    Args:
        A: m x d matrix
        p: Order, p >= 1
        max_columns: Column budget (default: data.poly_max_columns from config)

    Returns:
        np.ndarray: m x (C(d+p, p) - 1) matrix; the first d columns equal A

    Raises:
        BudgetExceededError: Output would exceed max_columns
    """
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2:
        raise InvalidArgumentError(f"A must be 2-dimensional, got shape {A.shape}")
    if p < 1:
        raise InvalidArgumentError(f"order p must be at least 1, got {p}")
    m, d = A.shape
    budget = int(max_columns if max_columns is not None else get_section("data")["poly_max_columns"])
    total = poly_column_count(d, p)
    if total > budget:
        raise BudgetExceededError(
            f"order-{p} expansion of {d} features needs {total} columns (budget {budget})",
            required=total, budget=budget,
        )

    out = np.empty((m, total))
    out[:, :d] = A
    position: Dict[Tuple[int, ...], int] = {(j,): j for j in range(d)}
    column = d
    for degree in range(2, p + 1):
        for monomial in combinations_with_replacement(range(d), degree):
            out[:, column] = out[:, position[monomial[:-1]]] * A[:, monomial[-1]]
            position[monomial] = column
            column += 1
    return out
