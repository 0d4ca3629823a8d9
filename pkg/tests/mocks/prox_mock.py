"""
Fault-injection doubles for the numerical kernels

These stand in for real kernels when a test needs to prove that the
acceptance checks and the outer driver notice a broken component.

Features:
- CorruptedProx: wraps prox_primal and shifts its output
- FailingSubproblemSolver: wraps solve_subproblem and raises on a chosen call
- Call counting and failure-mode switches, like the other service mocks

Usage:
    from tests.mocks import CorruptedProx

    corrupted = CorruptedProx(offset=1e-6)
    mocker.patch("sparse_iscra.solver.prox.prox_primal", new=corrupted)
"""

from typing import Dict

import numpy as np

from sparse_iscra.solver import prox, ssnal
from sparse_iscra.utils.errors import InnerSolverError

# captured before any patching so the wrappers never call themselves
_REAL_PROX_PRIMAL = prox.prox_primal
_REAL_SOLVE_SUBPROBLEM = ssnal.solve_subproblem


class CorruptedProx:
    """
    Drop-in replacement for prox_primal with an additive error.

    Attributes:
        offset (float): Added to every output coordinate while failing
        should_fail (bool): When False the real kernel result is returned
        failure_type (str): 'offset' (shift the output) or 'nan'
        call_count (int): Number of calls seen
    """

    def __init__(self, offset: float = 1e-6):
        self.offset = offset
        self.should_fail = True
        self.failure_type = "offset"
        self.call_count = 0

    def __call__(self, u, penalty, step: float = 1.0) -> np.ndarray:
        self.call_count += 1
        result = _REAL_PROX_PRIMAL(u, penalty, step)
        if not self.should_fail:
            return result
        if self.failure_type == "nan":
            return np.full_like(result, np.nan)
        return result + self.offset

    def set_failure_mode(self, should_fail: bool, failure_type: str = "offset"):
        self.should_fail = should_fail
        self.failure_type = failure_type

    def get_stats(self) -> Dict:
        return {"call_count": self.call_count, "should_fail": self.should_fail,
                "failure_type": self.failure_type}


class FailingSubproblemSolver:
    """
    Replacement for solve_subproblem that fails on the N-th call.

    Calls before fail_on_call are forwarded to the real solver, so the outer
    loop builds a genuine partial history first.

    Attributes:
        fail_on_call (int): 1-based call number that raises
        failure_type (str): 'solver' (InnerSolverError) or 'linalg' (LinAlgError)
        call_count (int): Number of calls seen
    """

    def __init__(self, fail_on_call: int = 2, failure_type: str = "solver"):
        self.fail_on_call = fail_on_call
        self.failure_type = failure_type
        self.call_count = 0

    def __call__(self, *args, **kwargs):
        self.call_count += 1
        if self.call_count >= self.fail_on_call:
            if self.failure_type == "linalg":
                raise np.linalg.LinAlgError("Matrix is singular")
            raise InnerSolverError("simulated inner failure")
        return _REAL_SOLVE_SUBPROBLEM(*args, **kwargs)

    def get_stats(self) -> Dict:
        return {"call_count": self.call_count, "fail_on_call": self.fail_on_call}
