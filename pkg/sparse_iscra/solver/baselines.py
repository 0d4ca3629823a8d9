"""
Baseline sequential convex relaxations

All baselines are majorization-minimization loops whose subproblems are
weighted-l1 problems solved by the same SSNAL engine:

    - lasso       plain l1 (one solve)
    - lla         local linear approximation of SCAD or MCP: weights
                  w_i = phi'(|x_i|) / lam from the previous iterate
    - mscr_cl1    capped l1: penalize only T = {i : |x_i| <= eps}, leave the
                  rest free (T is recomputed each time, not nested)
    - dca_trl1    DC algorithm for the transformed l1 penalty
                  rho_a(t) = (a+1)|t| / (a+|t|), with ridge c||x||^2

Every loop starts from x0 (the Lasso by default) and stops when
||x^k - x^{k-1}|| / ||x^k||_1 <= rel_change_tol or after max_outer solves.
Trace records carry selected = () and working_set = the penalized set.

Example:
    options = BaselineOptions.from_config(lam=0.1)
    trace = lla(instance, options, "scad")
"""

import math
import time
from dataclasses import dataclass
from typing import Any, Callable, Dict, Optional, Tuple

import numpy as np

from ..models.problem import (
    STATUS_MAX_ITER, STATUS_REL_CHANGE,
    IterationRecord, ProblemInstance, SeparablePenalty, SolveTrace, loss,
)
from ..utils.config import get_section
from ..utils.console import Fore, print_colored
from ..utils.errors import InvalidArgumentError
from .iscra import relative_change
from .ssnal import SsnalCaps, SsnalReport, SsnalState, solve_subproblem

X0_POLICIES = ("lasso", "zero", "custom")


@dataclass(frozen=True)
class BaselineOptions:
    lam: float
    scad_a: float = 3.7
    mcp_a: float = 3.0
    cap_epsilon: Optional[float] = None
    tl1_a: float = 1.0
    tl1_c: float = 1e-8
    rel_change_tol: float = 1e-3
    max_outer: int = 50
    x0_policy: str = "lasso"
    x0: Optional[np.ndarray] = None
    inner_tolerance: float = 1e-6

    def __post_init__(self) -> None:
        if not self.lam > 0:
            raise InvalidArgumentError(f"lambda must be positive, got {self.lam}")
        if not self.scad_a > 2:
            raise InvalidArgumentError(f"SCAD parameter a must exceed 2, got {self.scad_a}")
        if not self.mcp_a > 1:
            raise InvalidArgumentError(f"MCP parameter a must exceed 1, got {self.mcp_a}")
        if not (self.tl1_a > 0 and self.tl1_c > 0):
            raise InvalidArgumentError("transformed-l1 parameters a and c must be positive")
        if self.cap_epsilon is not None and not self.cap_epsilon > 0:
            raise InvalidArgumentError(f"cap epsilon must be positive, got {self.cap_epsilon}")
        if self.x0_policy not in X0_POLICIES:
            raise InvalidArgumentError(f"x0_policy must be one of {X0_POLICIES}")
        if self.x0_policy == "custom" and self.x0 is None:
            raise InvalidArgumentError("x0_policy 'custom' needs an x0 vector")
        if self.max_outer < 1:
            raise InvalidArgumentError("max_outer must be at least 1")

    @classmethod
    def from_config(cls, lam: float, config: Optional[Dict[str, Any]] = None, **overrides: Any) -> "BaselineOptions":
        section = get_section("baselines", config)
        values = {name: section[name] for name in cls.__dataclass_fields__ if name in section}
        values["max_outer"] = int(values.get("max_outer", 50))
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(lam=lam, **values)

    def epsilon_for(self, instance: ProblemInstance) -> float:
        """Cap threshold; default 0.5 * sqrt(ln(n) / m)."""
        if self.cap_epsilon is not None:
            return self.cap_epsilon
        return 0.5 * math.sqrt(math.log(max(instance.n, 2)) / instance.m)


# Penalty derivatives and values

def scad_weight(t, lam: float, a: float = 3.7):
    """phi'_SCAD(|t|) / lam: 1 for |t| <= lam, (a*lam - |t|)_+ / ((a-1)*lam) beyond."""
    t = np.abs(np.asarray(t, dtype=np.float64))
    tail = np.maximum(a * lam - t, 0.0) / ((a - 1.0) * lam)
    weight = np.where(t <= lam, 1.0, tail)
    return float(weight) if weight.ndim == 0 else weight


def mcp_weight(t, lam: float, a: float = 3.0):
    """phi'_MCP(|t|) / lam = (1 - |t|/(a*lam))_+."""
    t = np.abs(np.asarray(t, dtype=np.float64))
    weight = np.maximum(1.0 - t / (a * lam), 0.0)
    return float(weight) if weight.ndim == 0 else weight


def scad_penalty(t, lam: float, a: float = 3.7) -> np.ndarray:
    t = np.abs(np.asarray(t, dtype=np.float64))
    middle = (2 * a * lam * t - t ** 2 - lam ** 2) / (2 * (a - 1))
    return np.where(t <= lam, lam * t, np.where(t <= a * lam, middle, lam ** 2 * (a + 1) / 2))


def mcp_penalty(t, lam: float, a: float = 3.0) -> np.ndarray:
    t = np.abs(np.asarray(t, dtype=np.float64))
    return np.where(t <= a * lam, lam * t - t ** 2 / (2 * a), a * lam ** 2 / 2)


def capped_l1_penalty(t, lam: float, epsilon: float) -> np.ndarray:
    return lam * np.minimum(np.abs(np.asarray(t, dtype=np.float64)), epsilon)


def transformed_l1(t, a: float = 1.0) -> np.ndarray:
    """rho_a(t) = (a+1)|t| / (a+|t|)."""
    t = np.abs(np.asarray(t, dtype=np.float64))
    return (a + 1.0) * t / (a + t)


def dca_concave_part(t, lam: float, a: float = 1.0) -> np.ndarray:
    """h(t) = lam * ((1 + 1/a)|t| - rho_a(t)), convex and differentiable."""
    t = np.asarray(t, dtype=np.float64)
    return lam * ((1.0 + 1.0 / a) * np.abs(t) - transformed_l1(t, a))


def dca_tilt(x, lam: float, a: float = 1.0) -> np.ndarray:
    """v = h'(x) = lam * sign(x) * ((1 + 1/a) - a(a+1)/(a+|x|)^2); 0 at x = 0."""
    x = np.asarray(x, dtype=np.float64)
    return lam * np.sign(x) * ((1.0 + 1.0 / a) - a * (a + 1.0) / (a + np.abs(x)) ** 2)


def dca_surrogate(y, x, lam: float, a: float = 1.0) -> float:
    """(1+1/a)lam||y||_1 - [h(x) + <h'(x), y - x>]; majorizes lam*sum rho_a(y)."""
    y = np.asarray(y, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    linear = float(np.sum(dca_concave_part(x, lam, a)) + dca_tilt(x, lam, a) @ (y - x))
    return (1.0 + 1.0 / a) * lam * float(np.sum(np.abs(y))) - linear


def penalized_objective(instance: ProblemInstance, x: np.ndarray, kind: str,
                        options: BaselineOptions) -> float:
    """Nonconvex objective each baseline decreases: loss plus its penalty."""
    lam = options.lam
    if kind == "lasso":
        penalty = lam * np.abs(x)
    elif kind == "scad":
        penalty = scad_penalty(x, lam, options.scad_a)
    elif kind == "mcp":
        penalty = mcp_penalty(x, lam, options.mcp_a)
    elif kind == "capped-l1":
        penalty = capped_l1_penalty(x, lam, options.epsilon_for(instance))
    elif kind == "trl1":
        penalty = lam * transformed_l1(x, options.tl1_a) + options.tl1_c * np.asarray(x) ** 2
    else:
        raise InvalidArgumentError(f"unknown penalty kind {kind!r}")
    return loss(instance, x) + float(np.sum(penalty))


# Solvers

def _lasso_report(instance: ProblemInstance, lam: float, tol: float, caps: Optional[SsnalCaps],
                  warm: Optional[SsnalState] = None) -> SsnalReport:
    return solve_subproblem(instance, SeparablePenalty.lasso(instance.n, lam), warm=warm, tol=tol, caps=caps)


def lasso(instance: ProblemInstance, lam: float, tol: float = 1e-6,
          caps: Optional[SsnalCaps] = None) -> np.ndarray:
    """Plain Lasso: unit weights everywhere, no box."""
    if not lam > 0:
        raise InvalidArgumentError(f"lambda must be positive, got {lam}")
    return _lasso_report(instance, lam, tol, caps or SsnalCaps.from_config()).x_out


def lasso_trace(instance: ProblemInstance, options: BaselineOptions,
                caps: Optional[SsnalCaps] = None) -> SolveTrace:
    """Lasso wrapped as a one-record trace; status is max-iterations (its cap is one solve)."""
    caps = caps or SsnalCaps.from_config()
    started = time.perf_counter()
    report = _lasso_report(instance, options.lam, options.inner_tolerance, caps)
    trace = SolveTrace(solver="lasso", lam=options.lam)
    trace.iterates.append(IterationRecord(
        k=1, x=report.x_out, selected=(), working_set=tuple(range(instance.n)),
        inexactness=report.realized_inexactness, inner_stats=report.stats(),
        time_s=time.perf_counter() - started,
    ))
    trace.final_x = report.x_out
    trace.status = STATUS_MAX_ITER
    return trace


PenaltyBuilder = Callable[[np.ndarray], Tuple[SeparablePenalty, float]]


def _majorization_loop(instance: ProblemInstance, options: BaselineOptions, name: str,
                       build: PenaltyBuilder, caps: Optional[SsnalCaps], verbose: bool) -> SolveTrace:
    caps = caps or SsnalCaps.from_config()
    warm: Optional[SsnalState] = None
    if options.x0_policy == "lasso":
        report = _lasso_report(instance, options.lam, options.inner_tolerance, caps)
        x_prev, warm = report.x_out, report.state
    elif options.x0_policy == "zero":
        x_prev = np.zeros(instance.n)
    else:
        x_prev = np.asarray(options.x0, dtype=np.float64)
        if x_prev.shape != (instance.n,):
            raise InvalidArgumentError(f"x0 must have length {instance.n}")

    trace = SolveTrace(solver=name, lam=options.lam)
    for k in range(1, options.max_outer + 1):
        penalty, ridge = build(x_prev)
        started = time.perf_counter()
        report = solve_subproblem(instance, penalty, warm=warm, tol=options.inner_tolerance,
                                  caps=caps, ridge=ridge)
        x = report.x_out
        warm = report.state
        trace.iterates.append(IterationRecord(
            k=k, x=x, selected=(), working_set=penalty.working_set,
            inexactness=report.realized_inexactness, inner_stats=report.stats(),
            time_s=time.perf_counter() - started,
        ))
        if verbose:
            print_colored(f"  {name} k={k}: |T|={len(penalty.working_set)} inner={report.status}", Fore.CYAN)
        change = relative_change(x, x_prev)
        x_prev = x
        if change <= options.rel_change_tol:
            trace.status = STATUS_REL_CHANGE
            break
    else:
        trace.status = STATUS_MAX_ITER
    trace.final_x = x_prev
    return trace


def lla(instance: ProblemInstance, options: BaselineOptions, penalty_kind: str = "scad",
        caps: Optional[SsnalCaps] = None, verbose: bool = False) -> SolveTrace:
    """
    Local linear approximation with SCAD or MCP weights.

    Args:
        penalty_kind: "scad" or "mcp"
    """
    kind = penalty_kind.lower()
    if kind == "scad":
        weight_fn = lambda x: scad_weight(x, options.lam, options.scad_a)
    elif kind == "mcp":
        weight_fn = lambda x: mcp_weight(x, options.lam, options.mcp_a)
    else:
        raise InvalidArgumentError(f"penalty_kind must be 'scad' or 'mcp', got {penalty_kind!r}")

    def build(x_prev):
        weights = np.atleast_1d(weight_fn(x_prev))
        return SeparablePenalty.weighted_l1(weights, options.lam), 0.0

    return _majorization_loop(instance, options, f"lla-{kind}", build, caps, verbose)


def mscr_cl1(instance: ProblemInstance, options: BaselineOptions,
             caps: Optional[SsnalCaps] = None, verbose: bool = False) -> SolveTrace:
    """Multi-stage capped-l1 relaxation: penalize T = {|x_i| <= eps}, others free."""
    epsilon = options.epsilon_for(instance)

    def build(x_prev):
        weights = (np.abs(x_prev) <= epsilon).astype(np.float64)
        return SeparablePenalty.weighted_l1(weights, options.lam), 0.0

    return _majorization_loop(instance, options, "mscr-cl1", build, caps, verbose)


def dca_trl1(instance: ProblemInstance, options: BaselineOptions,
             caps: Optional[SsnalCaps] = None, verbose: bool = False) -> SolveTrace:
    """
    DC algorithm for the transformed l1 penalty.

    Subproblem: loss + c||x||^2 + (1+1/a)lam||x||_1 - <x, v^k>, v^k = h'(x^k).
    """
    a = options.tl1_a
    weights = np.full(instance.n, 1.0 + 1.0 / a)

    def build(x_prev):
        tilt = dca_tilt(x_prev, options.lam, a)
        return SeparablePenalty.weighted_l1(weights, options.lam, tilt=tilt), options.tl1_c

    return _majorization_loop(instance, options, "dca-trl1", build, caps, verbose)
