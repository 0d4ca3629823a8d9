"""
SSNAL Inner Solver

Solves the convex subproblem

    min_x  (1/(2m))||Ax - b||^2 + c||x||^2 + f(x)

for a SeparablePenalty f by an augmented Lagrangian method on the dual

    min_{zeta,u}  -b'zeta + (m/2)||zeta||^2 + f*(u)   s.t.  A'zeta - u = 0

whose inner problems are minimized by a semismooth Newton method.

WORKFLOW (one ALM iteration):
----------------------------
1. Newton on Phi(zeta) = -b'zeta + (m/2)||zeta||^2 + e_{1/sigma} f*(B(zeta)),
   B(zeta) = A'zeta + x/sigma, until ||grad Phi|| <= inner tolerance
   - Newton matrix m*E + sigma*A_J A_J' where J = {i : d_i = 0}
   - direct (Woodbury / Cholesky) solve for small systems, CG otherwise
   - Armijo backtracking on Phi
2. Multiplier update x <- x + sigma(A'zeta - u), evaluated as
   prox_primal(sigma*B; sigma) so zeros and box bounds are exact
3. Stop when ||x - P_1 f(x - (1/m)A'(Ax - b))|| <= tol*||b||, else grow sigma

RIDGE TERMS:
------------
c||x||^2 is absorbed by stacking sqrt(2mc)*E under A and zeros under b while
keeping the scale m of the original instance.

Usage:
    from sparse_iscra.solver.ssnal import SsnalCaps, solve_subproblem

    report = solve_subproblem(instance, penalty, tol=1e-6)
    print(report.x_out, report.kkt_residual, report.status)

    # warm start the next subproblem
    report2 = solve_subproblem(instance, penalty2, warm=report.state, tol=1e-6)
"""

from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Union

import numpy as np
import scipy.linalg
from scipy.sparse.linalg import LinearOperator, cg

from ..models.problem import ProblemInstance, SeparablePenalty
from ..utils.config import get_section
from ..utils.errors import InvalidArgumentError
from . import prox

STATUS_CONVERGED = "converged"
STATUS_MAX_ITER = "max-iterations"

LINEAR_SOLVERS = ("auto", "cg", "direct")


@dataclass(frozen=True)
class SsnalCaps:
    """Iteration caps and numeric policy of the ALM / Newton loops."""
    sigma0: float = 1.0
    sigma_factor: float = 5.0
    sigma_max: float = 1e8
    max_outer: int = 200
    max_newton: int = 50
    max_cg: int = 200
    armijo: float = 1e-4
    step_floor: float = 1e-12
    direct_solve_max: int = 1500
    linear_solver: str = "auto"

    def __post_init__(self) -> None:
        if not (self.sigma0 > 0 and self.sigma_factor >= 1 and self.sigma_max >= self.sigma0):
            raise InvalidArgumentError("sigma schedule must satisfy sigma0 > 0, factor >= 1, max >= sigma0")
        if min(self.max_outer, self.max_newton, self.max_cg) < 1:
            raise InvalidArgumentError("iteration caps must be positive")
        if self.linear_solver not in LINEAR_SOLVERS:
            raise InvalidArgumentError(f"linear_solver must be one of {LINEAR_SOLVERS}")

    @classmethod
    def from_config(cls, config: Optional[Dict[str, Any]] = None, **overrides: Any) -> "SsnalCaps":
        section = get_section("ssnal", config)
        values = {name: section[name] for name in cls.__dataclass_fields__ if name in section}
        values.update({k: v for k, v in overrides.items() if v is not None})
        for name in ("max_outer", "max_newton", "max_cg", "direct_solve_max"):
            values[name] = int(values[name])
        return cls(**values)


@dataclass(frozen=True)
class AugmentedProblem:
    """(A, b) possibly stacked with a ridge block; scale is the original m."""
    A: np.ndarray
    b: np.ndarray
    scale: float
    b_norm: float

    @classmethod
    def from_instance(cls, instance: ProblemInstance, ridge: float = 0.0) -> "AugmentedProblem":
        if ridge < 0:
            raise InvalidArgumentError(f"ridge coefficient must be nonnegative, got {ridge}")
        m, n = instance.A.shape
        b_norm = float(np.linalg.norm(instance.b))
        if ridge == 0:
            return cls(instance.A, instance.b, float(m), b_norm)
        block = np.sqrt(2.0 * m * ridge) * np.eye(n)
        return cls(np.vstack([instance.A, block]), np.concatenate([instance.b, np.zeros(n)]), float(m), b_norm)

    @property
    def rows(self) -> int:
        return self.A.shape[0]


@dataclass(frozen=True)
class SsnalState:
    """Dual iterate zeta, primal multiplier x, penalty sigma and counters."""
    zeta: np.ndarray
    x: np.ndarray
    sigma: float
    outer_iter: int = 0
    newton_iter: int = 0
    cg_iter: int = 0

    def __post_init__(self) -> None:
        if not self.sigma > 0:
            raise InvalidArgumentError(f"sigma must be positive, got {self.sigma}")


@dataclass
class SsnalReport:
    x_out: np.ndarray
    zeta_out: np.ndarray
    kkt_residual: float
    realized_inexactness: float
    status: str
    outer_iters: int = 0
    newton_iters: int = 0
    cg_iters: int = 0
    degraded_steps: int = 0
    line_search_failures: int = 0
    sigma: float = 1.0
    primal_objective: float = 0.0
    dual_objective: float = float("-inf")
    state: Optional[SsnalState] = field(default=None, repr=False)

    @property
    def converged(self) -> bool:
        return self.status == STATUS_CONVERGED

    def stats(self) -> Dict[str, Any]:
        return {
            "status": self.status,
            "kkt_residual": self.kkt_residual,
            "alm_iters": self.outer_iters,
            "newton_iters": self.newton_iters,
            "cg_iters": self.cg_iters,
            "degraded_steps": self.degraded_steps,
            "sigma": self.sigma,
        }


@dataclass(frozen=True)
class NewtonDirection:
    direction: np.ndarray
    cg_iters: int = 0
    degraded: bool = False
    method: str = "direct"


ProblemLike = Union[ProblemInstance, AugmentedProblem]


def _as_problem(problem: ProblemLike, ridge: float = 0.0) -> AugmentedProblem:
    if isinstance(problem, AugmentedProblem):
        return problem
    return AugmentedProblem.from_instance(problem, ridge)


def _dual_point(state: SsnalState, problem: AugmentedProblem, penalty: SeparablePenalty):
    step = 1.0 / state.sigma
    B = problem.A.T @ state.zeta + state.x * step
    p = prox.prox_conjugate(B, penalty, step)
    return B, p


def phi_value(state: SsnalState, problem: ProblemLike, penalty: SeparablePenalty, ridge: float = 0.0) -> float:
    """Phi(zeta) = -b'zeta + (m/2)||zeta||^2 + e_{1/sigma} f*(B(zeta))."""
    problem = _as_problem(problem, ridge)
    B = problem.A.T @ state.zeta + state.x / state.sigma
    envelope = prox.moreau_envelope_conjugate(B, penalty, 1.0 / state.sigma)
    zeta = state.zeta
    return float(-problem.b @ zeta + 0.5 * problem.scale * (zeta @ zeta) + envelope)


def grad_phi(state: SsnalState, problem: ProblemLike, penalty: SeparablePenalty, ridge: float = 0.0) -> np.ndarray:
    """grad Phi(zeta) = m*zeta + sigma*A(B - prox_conjugate(B; 1/sigma)) - b."""
    problem = _as_problem(problem, ridge)
    B, p = _dual_point(state, problem, penalty)
    return problem.scale * state.zeta + state.sigma * (problem.A @ (B - p)) - problem.b


def active_columns(state: SsnalState, problem: ProblemLike, penalty: SeparablePenalty, ridge: float = 0.0) -> np.ndarray:
    """Indices J with d_i = 0; only these columns enter the Newton matrix."""
    problem = _as_problem(problem, ridge)
    B = problem.A.T @ state.zeta + state.x / state.sigma
    d = prox.jacobian_diag(B, penalty, 1.0 / state.sigma)
    return np.flatnonzero(d == 0)


def newton_matrix(state: SsnalState, problem: ProblemLike, penalty: SeparablePenalty, ridge: float = 0.0) -> np.ndarray:
    """Dense m*E + sigma*A(E - D)A' (small instances and tests only)."""
    problem = _as_problem(problem, ridge)
    A_J = problem.A[:, active_columns(state, problem, penalty)]
    return problem.scale * np.eye(problem.rows) + state.sigma * (A_J @ A_J.T)


def _direct_solve(A_J: np.ndarray, scale: float, sigma: float, rhs: np.ndarray) -> np.ndarray:
    rows, size = A_J.shape
    if size == 0:
        return rhs / scale
    if size <= rows:
        # Woodbury: only a |J| x |J| system
        small = (scale / sigma) * np.eye(size) + A_J.T @ A_J
        inner = scipy.linalg.solve(small, A_J.T @ rhs, assume_a="pos")
        return (rhs - A_J @ inner) / scale
    H = scale * np.eye(rows) + sigma * (A_J @ A_J.T)
    return scipy.linalg.solve(H, rhs, assume_a="pos")


def newton_step(
    state: SsnalState,
    problem: ProblemLike,
    penalty: SeparablePenalty,
    caps: Optional[SsnalCaps] = None,
    gradient: Optional[np.ndarray] = None,
    cg_tol: Optional[float] = None,
    method: Optional[str] = None,
    ridge: float = 0.0,
) -> NewtonDirection:
    """
    Solve (m*E + sigma*A(E - D)A') p = -grad Phi(zeta).

    Args:
        state: Current iterate
        problem: Instance (or already augmented problem)
        penalty: Separable penalty
        caps: Solver policy (default SsnalCaps())
        gradient: Precomputed grad Phi, if available
        cg_tol: Relative CG tolerance (default 1e-2 * min(1, ||grad Phi||))
        method: "auto", "cg" or "direct" (default caps.linear_solver)

    Returns:
        NewtonDirection: The direction plus CG count and degraded flag.
        When CG hits its cap the direction falls back to -grad Phi / m.
    """
    problem = _as_problem(problem, ridge)
    caps = caps or SsnalCaps()
    g = grad_phi(state, problem, penalty) if gradient is None else gradient
    J = active_columns(state, problem, penalty)
    A_J = problem.A[:, J]
    method = method or caps.linear_solver
    if method == "auto":
        method = "direct" if min(problem.rows, J.size) <= caps.direct_solve_max else "cg"

    if method == "direct":
        try:
            return NewtonDirection(_direct_solve(A_J, problem.scale, state.sigma, -g), method="direct")
        except (np.linalg.LinAlgError, scipy.linalg.LinAlgError):
            method = "cg"

    scale, sigma = problem.scale, state.sigma
    operator = LinearOperator(
        (problem.rows, problem.rows),
        matvec=lambda v: scale * v + sigma * (A_J @ (A_J.T @ v)),
        dtype=np.float64,
    )
    counter = {"iters": 0}

    def _count(_):
        counter["iters"] += 1

    rtol = cg_tol if cg_tol is not None else 1e-2 * min(1.0, float(np.linalg.norm(g)))
    direction, info = cg(operator, -g, rtol=rtol, atol=0.0, maxiter=caps.max_cg, callback=_count)
    if info != 0:
        return NewtonDirection(-g / scale, cg_iters=counter["iters"], degraded=True, method="cg")
    return NewtonDirection(direction, cg_iters=counter["iters"], method="cg")


def kkt_residual(x: np.ndarray, problem: ProblemLike, penalty: SeparablePenalty, ridge: float = 0.0) -> float:
    """||x - prox_primal(x - (1/m)A'(Ax - b); 1)||."""
    problem = _as_problem(problem, ridge)
    gradient = problem.A.T @ (problem.A @ x - problem.b) / problem.scale
    return float(np.linalg.norm(x - prox.prox_primal(x - gradient, penalty, 1.0)))


def realized_inexactness(x: np.ndarray, problem: ProblemLike, penalty: SeparablePenalty, ridge: float = 0.0) -> float:
    """
    lam^{-1} * dist_inf(g, subdifferential of f at x), g = (1/m)A'(b - Ax).

    Coordinatewise with g' = g + v:
        x_i != 0, inside the box : |g'_i - alpha_i*sign(x_i)|
        x_i == 0                 : (|g'_i| - alpha_i)_+
        |x_i| at the box radius  : (alpha_i - sign(x_i)*g'_i)_+

    This is the certified bound on ||xi||_inf for the inexact subproblem.
    """
    problem = _as_problem(problem, ridge)
    x = np.asarray(x, dtype=np.float64)
    if x.size == 0:
        return 0.0
    g = problem.A.T @ (problem.b - problem.A @ x) / problem.scale + penalty.tilt
    alpha = penalty.alpha
    sign = np.sign(x)
    radius = penalty.box_radius
    at_box = penalty.finite_box & (np.abs(x) >= np.where(penalty.finite_box, radius, 0.0) * (1 - 1e-12))

    distance = np.where(x == 0, np.maximum(np.abs(g) - alpha, 0.0), np.abs(g - alpha * sign))
    distance = np.where(at_box, np.maximum(alpha - sign * g, 0.0), distance)
    return float(np.max(distance)) / penalty.lam


def primal_objective(x: np.ndarray, problem: ProblemLike, penalty: SeparablePenalty, ridge: float = 0.0) -> float:
    """(1/(2m))||A_aug x - b_aug||^2 + f(x)."""
    problem = _as_problem(problem, ridge)
    residual = problem.A @ x - problem.b
    return float(residual @ residual) / (2.0 * problem.scale) + penalty.value(x)


def dual_objective(zeta: np.ndarray, problem: ProblemLike, penalty: SeparablePenalty, ridge: float = 0.0) -> float:
    """
    Dual value at a repaired, dual-feasible version of zeta.

    Coordinates with no weight and no box force (A'zeta)_i = 0, so zeta is
    first projected onto the null space of those columns' transposes; then
    zeta is shrunk by the largest s in [0, 1] keeping |s*(A'zeta)_i + v_i| <=
    alpha_i on unboxed coordinates. The value
        s*b'zeta - (m/2)s^2||zeta||^2 - f*(s*A'zeta)
    is a lower bound on the optimal primal objective.
    """
    problem = _as_problem(problem, ridge)
    zeta = np.asarray(zeta, dtype=np.float64)
    unboxed = ~penalty.finite_box
    free = unboxed & (penalty.alpha == 0)
    if np.any(free):
        basis = scipy.linalg.orth(problem.A[:, free])
        if basis.size:
            zeta = zeta - basis @ (basis.T @ zeta)

    a = problem.A.T @ zeta
    alpha, v = penalty.alpha, penalty.tilt
    constrained = unboxed & ~free
    if np.any(np.abs(v[constrained]) > alpha[constrained]):
        return float("-inf")
    s = 1.0
    upper = np.where(a > 0, alpha - v, -alpha - v)
    with np.errstate(divide="ignore", invalid="ignore"):
        limits = np.where(constrained & (a != 0), upper / np.where(a != 0, a, 1.0), np.inf)
    if limits.size:
        s = float(np.clip(np.min(limits), 0.0, 1.0))

    z = s * a
    finite = penalty.finite_box
    excess = np.maximum(np.abs(z[finite] + v[finite]) - alpha[finite], 0.0)
    conjugate = float(penalty.box_radius[finite] @ excess)
    return float(s * (problem.b @ zeta) - 0.5 * problem.scale * s * s * (zeta @ zeta) - conjugate)


def initial_state(problem: ProblemLike, n: int, caps: Optional[SsnalCaps] = None,
                  warm: Optional[SsnalState] = None) -> SsnalState:
    """Cold start at zeros, or reuse warm (zeta, x) with sigma reset to sigma0."""
    problem = _as_problem(problem)
    caps = caps or SsnalCaps()
    zeta = np.zeros(problem.rows)
    x = np.zeros(n)
    if warm is not None:
        if warm.x.shape == (n,):
            x = np.array(warm.x, dtype=np.float64)
        if warm.zeta.shape == (problem.rows,):
            zeta = np.array(warm.zeta, dtype=np.float64)
    return SsnalState(zeta=zeta, x=x, sigma=caps.sigma0)


def _line_search(state, problem, penalty, direction, gradient, caps):
    phi0 = phi_value(state, problem, penalty)
    slope = float(gradient @ direction)
    step = 1.0
    while step >= caps.step_floor:
        trial = SsnalState(zeta=state.zeta + step * direction, x=state.x, sigma=state.sigma)
        if phi_value(trial, problem, penalty) <= phi0 + caps.armijo * step * slope:
            return trial.zeta
        step *= 0.5
    return None


def solve_subproblem(
    instance: ProblemLike,
    penalty: SeparablePenalty,
    warm: Optional[SsnalState] = None,
    tol: float = 1e-6,
    caps: Optional[SsnalCaps] = None,
    ridge: float = 0.0,
) -> SsnalReport:
    """
    Solve min (1/(2m))||Ax - b||^2 + ridge*||x||^2 + f(x) inexactly.

    Args:
        instance: The regression instance
        penalty: Separable penalty f
        warm: State of a previous solve to start from
        tol: Relative KKT tolerance; stops when kkt_residual <= tol*||b||
        caps: Iteration caps and policy
        ridge: Coefficient c of an extra c*||x||^2 term

    Returns:
        SsnalReport: Solution, certificates and counters. When caps are
        exhausted, status is max-iterations and x_out is the best iterate
        seen, with its own residual.
    """
    if not tol > 0:
        raise InvalidArgumentError(f"tolerance must be positive, got {tol}")
    problem = _as_problem(instance, ridge)
    n = problem.A.shape[1]
    if penalty.n != n:
        raise InvalidArgumentError(f"penalty has {penalty.n} coordinates but A has {n} columns")
    caps = caps or SsnalCaps()

    state = initial_state(problem, n, caps, warm)
    target = tol * (problem.b_norm if problem.b_norm > 0 else 1.0)
    floor = 1e-13 * (1.0 + problem.b_norm)
    inner_tol = max(0.1 * target, 1e-12) * (1.0 + problem.b_norm)

    best_x = state.x
    best_res = kkt_residual(state.x, problem, penalty)
    best_zeta = state.zeta
    counters = {"newton": 0, "cg": 0, "degraded": 0, "ls_fail": 0}
    status = STATUS_CONVERGED if best_res <= target else STATUS_MAX_ITER
    outer = 0

    while status != STATUS_CONVERGED and outer < caps.max_outer:
        outer += 1
        for _ in range(caps.max_newton):
            gradient = grad_phi(state, problem, penalty)
            if np.linalg.norm(gradient) <= inner_tol:
                break
            step = newton_step(state, problem, penalty, caps, gradient=gradient)
            counters["newton"] += 1
            counters["cg"] += step.cg_iters
            counters["degraded"] += int(step.degraded)
            direction = step.direction
            if float(gradient @ direction) >= 0:
                direction = -gradient / problem.scale
                counters["degraded"] += 1
            zeta = _line_search(state, problem, penalty, direction, gradient, caps)
            if zeta is None:
                counters["ls_fail"] += 1
                break
            state = SsnalState(zeta=zeta, x=state.x, sigma=state.sigma)

        B = problem.A.T @ state.zeta + state.x / state.sigma
        x_new = prox.prox_primal(state.sigma * B, penalty, state.sigma)
        residual = kkt_residual(x_new, problem, penalty)
        if residual <= best_res:
            best_x, best_res, best_zeta = x_new, residual, state.zeta
        if residual <= target:
            best_x, best_res, best_zeta = x_new, residual, state.zeta
            status = STATUS_CONVERGED
        state = SsnalState(
            zeta=state.zeta,
            x=x_new,
            sigma=state.sigma if status == STATUS_CONVERGED else min(caps.sigma_factor * state.sigma, caps.sigma_max),
            outer_iter=outer,
            newton_iter=counters["newton"],
            cg_iter=counters["cg"],
        )
        inner_tol = max(0.2 * inner_tol, floor)

    x_out = best_x if status != STATUS_CONVERGED else state.x
    # the residual-based dual of x_out; the ALM zeta is stale when no iteration ran
    zeta_out, dual_value = best_zeta, dual_objective(best_zeta, problem, penalty)
    natural = (problem.b - problem.A @ x_out) / problem.scale
    natural_value = dual_objective(natural, problem, penalty)
    if natural_value >= dual_value:
        zeta_out, dual_value = natural, natural_value
    final_state = SsnalState(zeta=zeta_out, x=x_out, sigma=state.sigma, outer_iter=outer,
                             newton_iter=counters["newton"], cg_iter=counters["cg"])
    return SsnalReport(
        x_out=x_out,
        zeta_out=zeta_out,
        kkt_residual=kkt_residual(x_out, problem, penalty),
        realized_inexactness=realized_inexactness(x_out, problem, penalty),
        status=status,
        outer_iters=outer,
        newton_iters=counters["newton"],
        cg_iters=counters["cg"],
        degraded_steps=counters["degraded"],
        line_search_failures=counters["ls_fail"],
        sigma=state.sigma,
        primal_objective=primal_objective(x_out, problem, penalty),
        dual_objective=dual_value,
        state=final_state,
    )
