"""
Sequential truncated-l1 relaxation driver

Repeatedly solves

    min_x (1/(2m))||Ax - b||^2 + lam * ||x_T||_1    s.t. ||x_{T^c}||_inf <= mu

with a shrinking working set T. After each solve the coordinates of T whose
magnitude reaches rho times the largest magnitude on T are identified and
leave the working set (they become unpenalized, boxed by mu).

Termination (options.termination):
    - "theory":   max_{i in T}|x_i| <= epsilon, or T empty
    - "practice": ||x^k - x^{k-1}|| / ||x^k||_1 <= rel_change_tol (k >= 2)
    - "both":     whichever fires first (default)
and in every mode after max_outer subproblems.

Example:
    options = SolverOptions.from_config(lam=0.1, rho=0.8)
    trace = run(instance, options)
    x = postprocess(instance, trace)
"""

import time
from typing import Iterable, Optional, Tuple

import numpy as np
import scipy.linalg

from ..models.problem import (
    STATUS_EMPTY, STATUS_EPSILON, STATUS_MAX_ITER, STATUS_REL_CHANGE,
    IterationRecord, ProblemInstance, SeparablePenalty, SolveTrace, SolverOptions,
    as_index_tuple,
)
from ..utils.console import Fore, print_colored
from ..utils.errors import InnerSolverError, InvalidArgumentError, SparseIscraError
from .ssnal import SsnalCaps, SsnalReport, SsnalState, solve_subproblem

# retightenings allowed when a scheduled inexactness is missed
MAX_RETIGHTEN = 5


def select_indices(x: np.ndarray, working_set: Iterable[int], rho: float) -> Tuple[int, ...]:
    """
    I = {i in T : |x_i| >= rho * max_{j in T} |x_j|}.

    Raises:
        InvalidArgumentError: Empty working set or rho outside (0, 1]
    """
    T = np.asarray(as_index_tuple(working_set), dtype=int)
    if T.size == 0:
        raise InvalidArgumentError("cannot select from an empty working set")
    if not 0 < rho <= 1:
        raise InvalidArgumentError(f"rho must lie in (0, 1], got {rho}")
    magnitudes = np.abs(np.asarray(x, dtype=np.float64)[T])
    largest = magnitudes.max()
    if largest == 0:
        return ()
    return tuple(int(i) for i in T[magnitudes >= rho * largest])


def relative_change(x_new: np.ndarray, x_old: np.ndarray) -> float:
    """||x_new - x_old|| / ||x_new||_1 (0 when both vanish, inf when only x_new does)."""
    denominator = float(np.sum(np.abs(x_new)))
    difference = float(np.linalg.norm(x_new - x_old))
    if denominator == 0:
        return 0.0 if difference == 0 else float("inf")
    return difference / denominator


def _solve_to_schedule(instance, penalty, warm, options, k, caps) -> Tuple[SsnalReport, Optional[bool]]:
    tol = options.inner_tolerance
    report = solve_subproblem(instance, penalty, warm=warm, tol=tol, caps=caps)
    target = options.varsigma(k)
    if target is None:
        return report, None
    for _ in range(MAX_RETIGHTEN):
        if report.realized_inexactness <= target:
            break
        tol *= 0.1
        report = solve_subproblem(instance, penalty, warm=report.state, tol=tol, caps=caps)
    return report, report.realized_inexactness <= target


def run(
    instance: ProblemInstance,
    options: SolverOptions,
    caps: Optional[SsnalCaps] = None,
    verbose: bool = False,
) -> SolveTrace:
    """
    Run the sequential truncated-l1 relaxation.

    Args:
        instance: Regression instance
        options: Driver options (lam, rho, mu, epsilon, tolerances, mode)
        caps: Inner solver caps
        verbose: Print one line per outer iteration

    Returns:
        SolveTrace: One record per subproblem; final_x is the last iterate

    Raises:
        InnerSolverError: The inner solver raised; partial_trace holds the
        iterations completed so far
    """
    caps = caps or SsnalCaps.from_config()
    n = instance.n
    trace = SolveTrace(solver="iscra", lam=options.lam)
    working_set: Tuple[int, ...] = tuple(range(n))
    warm: Optional[SsnalState] = None
    previous_x: Optional[np.ndarray] = None
    theory = options.termination in ("both", "theory")
    practice = options.termination in ("both", "practice")
    k = 0

    while True:
        k += 1
        penalty = SeparablePenalty.truncated_l1(n, options.lam, working_set, options.mu)
        started = time.perf_counter()
        try:
            report, schedule_met = _solve_to_schedule(instance, penalty, warm, options, k, caps)
        except (SparseIscraError, np.linalg.LinAlgError, ValueError) as e:
            trace.final_x = previous_x
            raise InnerSolverError(f"inner solver failed at outer iteration {k}: {e}", partial_trace=trace) from e
        elapsed = time.perf_counter() - started
        x = report.x_out
        warm = report.state

        status = ""
        largest = float(np.max(np.abs(x[list(working_set)]))) if working_set else 0.0
        if not working_set:
            status = STATUS_EMPTY
        elif largest == 0 or (theory and largest <= options.epsilon):
            status = STATUS_EPSILON
        elif practice and previous_x is not None and relative_change(x, previous_x) <= options.rel_change_tol:
            status = STATUS_REL_CHANGE
        elif k >= options.max_outer:
            status = STATUS_MAX_ITER

        selected = () if status else select_indices(x, working_set, options.rho)
        working_set = tuple(i for i in working_set if i not in set(selected))
        trace.iterates.append(IterationRecord(
            k=k,
            x=x,
            selected=selected,
            working_set=working_set,
            inexactness=report.realized_inexactness,
            inner_stats=report.stats(),
            time_s=elapsed,
            schedule_met=schedule_met,
        ))
        if verbose:
            print_colored(
                f"  iscra k={k}: |I|={len(selected)} |T|={len(working_set)} "
                f"inexactness={report.realized_inexactness:.3g} inner={report.status}",
                Fore.CYAN
            )
        previous_x = x
        if status:
            trace.final_x = x
            trace.status = status
            return trace


def postprocess(instance: ProblemInstance, trace: SolveTrace) -> np.ndarray:
    """
    Least squares on the identified coordinates.

    Returns the minimum-norm solution of min ||A_J z - b|| over
    J = complement of the last penalized working set, embedded in R^n.
    """
    n = instance.n
    excluded = set(trace.last_working_set)
    J = [i for i in range(n) if i not in excluded]
    x = np.zeros(n)
    if not J:
        return x
    z, _, _, _ = scipy.linalg.lstsq(instance.A[:, J], instance.b)
    x[J] = z
    return x
