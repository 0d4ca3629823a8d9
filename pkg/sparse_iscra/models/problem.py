"""
Problem Model

Shared records used by every solver, diagnostic and experiment:

    - ProblemInstance: design matrix A (m x n) and response b
    - GroundTruth: true sparse vector x_bar and noise e (synthetic/toy data)
    - SeparablePenalty: per-coordinate weighted l1 + linear tilt + box,
      f(x) = sum_i lam*w_i*|x_i| - <v, x> + indicator(|x_i| <= mu_i)
    - SolverOptions: knobs of the sequential truncated-l1 driver
    - IterationRecord / SolveTrace: per-outer-iteration history

plus the model-level measures: loss, relative_error, support_metrics and the
trace validator.

All records are frozen dataclasses holding read-only float64 arrays, so they
can be shared between threads and worker processes without copying.

Example:
    from sparse_iscra.models.problem import ProblemInstance, SeparablePenalty, loss

    instance = ProblemInstance(A, b)
    penalty = SeparablePenalty.truncated_l1(instance.n, lam=0.1, working_set=range(instance.n), mu=1e3)
    print(loss(instance, x))
"""

from dataclasses import dataclass, field, replace
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from ..utils.config import get_section
from ..utils.errors import InvalidArgumentError

STATUS_EPSILON = "converged-by-epsilon"
STATUS_REL_CHANGE = "converged-by-relative-change"
STATUS_EMPTY = "working-set-empty"
STATUS_MAX_ITER = "max-iterations"

TERMINATION_MODES = ("both", "theory", "practice")


def _frozen_array(values: Any, name: str, ndim: int) -> np.ndarray:
    array = np.array(values, dtype=np.float64)
    if array.ndim != ndim:
        raise InvalidArgumentError(f"{name} must be {ndim}-dimensional, got shape {array.shape}")
    array.setflags(write=False)
    return array


def as_index_tuple(indices: Iterable[int]) -> Tuple[int, ...]:
    """Sorted tuple of distinct Python ints (0-based)."""
    return tuple(sorted({int(i) for i in indices}))


@dataclass(frozen=True)
class ProblemInstance:
    """
    Linear regression instance b ~ A x.

    Args:
        A: Dense m x n design matrix
        b: Response vector of length m
        cleaned: True when all-zero columns were removed (LIBSVM path);
                 the invariant is then checked on construction
        name: Label used in reports (preset name or file stem)
    """
    A: np.ndarray
    b: np.ndarray
    cleaned: bool = False
    name: str = ""

    def __post_init__(self) -> None:
        A = _frozen_array(self.A, "A", 2)
        b = _frozen_array(self.b, "b", 1)
        m, n = A.shape
        if m < 1 or n < 1:
            raise InvalidArgumentError(f"A must have at least one row and one column, got {A.shape}")
        if b.shape[0] != m:
            raise InvalidArgumentError(f"b has length {b.shape[0]} but A has {m} rows")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise InvalidArgumentError("A and b must contain only finite values")
        if self.cleaned and np.any(~A.any(axis=0)):
            raise InvalidArgumentError("instance flagged cleaned still has all-zero columns")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]


@dataclass(frozen=True)
class GroundTruth:
    """
    True regression vector and (optionally) the noise that produced b.

    support and r are derived from x_bar.
    """
    x_bar: np.ndarray
    noise: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "x_bar", _frozen_array(self.x_bar, "x_bar", 1))
        if self.noise is not None:
            object.__setattr__(self, "noise", _frozen_array(self.noise, "noise", 1))

    @property
    def support(self) -> Tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(self.x_bar))

    @property
    def r(self) -> int:
        return len(self.support)

    def noise_or_zero(self, m: int) -> np.ndarray:
        return self.noise if self.noise is not None else np.zeros(m)


@dataclass(frozen=True)
class SeparablePenalty:
    """
    f(x) = sum_i lam*w_i*|x_i| - <v, x> + indicator(|x_i| <= mu_i).

    Args:
        weights: Nonnegative l1 weights w (scaled by lam at use sites)
        tilt: Linear term v (subtracted)
        box_radius: Per-coordinate mu_i in (0, inf]; inf means unconstrained
        lam: Positive regularization parameter
    """
    weights: np.ndarray
    tilt: np.ndarray
    box_radius: np.ndarray
    lam: float

    def __post_init__(self) -> None:
        weights = _frozen_array(self.weights, "weights", 1)
        tilt = _frozen_array(np.broadcast_to(self.tilt, weights.shape), "tilt", 1)
        box = _frozen_array(np.broadcast_to(self.box_radius, weights.shape), "box_radius", 1)
        if not self.lam > 0:
            raise InvalidArgumentError(f"lambda must be positive, got {self.lam}")
        if np.any(weights < 0) or not np.all(np.isfinite(weights)):
            raise InvalidArgumentError("penalty weights must be finite and nonnegative")
        if np.any(~(box > 0)):
            raise InvalidArgumentError("box radii must be positive")
        if not np.all(np.isfinite(tilt)):
            raise InvalidArgumentError("penalty tilt must be finite")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "tilt", tilt)
        object.__setattr__(self, "box_radius", box)
        object.__setattr__(self, "lam", float(self.lam))

    @classmethod
    def truncated_l1(cls, n: int, lam: float, working_set: Iterable[int], mu: float) -> "SeparablePenalty":
        """Unit weight and no box on the working set; zero weight and box mu elsewhere."""
        weights = np.zeros(n)
        weights[list(as_index_tuple(working_set))] = 1.0
        box = np.where(weights > 0, np.inf, float(mu))
        return cls(weights=weights, tilt=np.zeros(n), box_radius=box, lam=lam)

    @classmethod
    def lasso(cls, n: int, lam: float) -> "SeparablePenalty":
        return cls(weights=np.ones(n), tilt=np.zeros(n), box_radius=np.full(n, np.inf), lam=lam)

    @classmethod
    def weighted_l1(cls, weights: Sequence[float], lam: float,
                    tilt: Optional[Sequence[float]] = None) -> "SeparablePenalty":
        weights = np.asarray(weights, dtype=np.float64)
        tilt = np.zeros_like(weights) if tilt is None else tilt
        return cls(weights=weights, tilt=tilt, box_radius=np.full(weights.shape, np.inf), lam=lam)

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    @property
    def alpha(self) -> np.ndarray:
        """Effective per-coordinate thresholds lam*w."""
        return self.lam * self.weights

    @property
    def finite_box(self) -> np.ndarray:
        return np.isfinite(self.box_radius)

    @property
    def is_truncated_l1(self) -> bool:
        return bool(np.all((self.weights == 0) | (self.weights == 1)) and not np.any(self.tilt))

    @property
    def working_set(self) -> Tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(self.weights))

    def value(self, x: np.ndarray) -> float:
        """f(x); +inf outside the box."""
        x = np.asarray(x, dtype=np.float64)
        if np.any(np.abs(x) > self.box_radius * (1 + 1e-12)):
            return float("inf")
        return float(self.alpha @ np.abs(x) - self.tilt @ x)


@dataclass(frozen=True)
class SolverOptions:
    """
    Options of the sequential truncated-l1 driver.

    varsigma_schedule: None means the inexactness target is implied by
    inner_tolerance; otherwise a nonincreasing sequence with first entry < 1
    (the last entry is reused once the sequence runs out).
    """
    lam: float
    rho: float = 0.2
    mu: float = 1e3
    epsilon: float = 0.0
    inner_tolerance: float = 1e-6
    varsigma_schedule: Optional[Tuple[float, ...]] = None
    max_outer: int = 50
    rel_change_tol: float = 1e-3
    termination: str = "both"

    def __post_init__(self) -> None:
        if not self.lam > 0:
            raise InvalidArgumentError(f"lambda must be positive, got {self.lam}")
        if not 0 < self.rho <= 1:
            raise InvalidArgumentError(f"rho must lie in (0, 1], got {self.rho}")
        if not self.mu > 0:
            raise InvalidArgumentError(f"mu must be positive, got {self.mu}")
        if self.epsilon < 0:
            raise InvalidArgumentError(f"epsilon must be nonnegative, got {self.epsilon}")
        if not (self.inner_tolerance > 0 and self.rel_change_tol > 0):
            raise InvalidArgumentError("tolerances must be positive")
        if self.max_outer < 1:
            raise InvalidArgumentError(f"max_outer must be at least 1, got {self.max_outer}")
        if self.termination not in TERMINATION_MODES:
            raise InvalidArgumentError(f"termination must be one of {TERMINATION_MODES}, got {self.termination!r}")
        if self.varsigma_schedule is not None:
            schedule = tuple(float(s) for s in self.varsigma_schedule)
            if not schedule:
                raise InvalidArgumentError("varsigma schedule must not be empty")
            if any(s < 0 for s in schedule) or schedule[0] >= 1:
                raise InvalidArgumentError("varsigma schedule must be nonnegative with first entry < 1")
            if any(later > earlier for earlier, later in zip(schedule, schedule[1:])):
                raise InvalidArgumentError("varsigma schedule must be nonincreasing")
            object.__setattr__(self, "varsigma_schedule", schedule)

    @classmethod
    def from_config(cls, lam: float, config: Optional[Dict[str, Any]] = None, **overrides: Any) -> "SolverOptions":
        """
        Build options from the `iscra` config section; explicit overrides win.

        Example:
            options = SolverOptions.from_config(lam=0.1, rho=0.8)
        """
        section = get_section("iscra", config)
        values = {
            "rho": section["rho"],
            "mu": section["mu"],
            "epsilon": section["epsilon"],
            "inner_tolerance": section["inner_tolerance"],
            "max_outer": int(section["max_outer"]),
            "rel_change_tol": section["rel_change_tol"],
            "termination": section["termination"],
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(lam=lam, **values)

    def varsigma(self, k: int) -> Optional[float]:
        """Scheduled inexactness for subproblem k (1-based), or None."""
        if self.varsigma_schedule is None:
            return None
        return self.varsigma_schedule[min(k - 1, len(self.varsigma_schedule) - 1)]

    def with_lambda(self, lam: float) -> "SolverOptions":
        return replace(self, lam=lam)


@dataclass(frozen=True)
class IterationRecord:
    """
    One outer iteration.

    working_set is T^k after removing selected (= I^k); the terminal record
    has selected = () so its working_set is the last set actually penalized.
    """
    k: int
    x: np.ndarray
    selected: Tuple[int, ...]
    working_set: Tuple[int, ...]
    inexactness: float
    inner_stats: Dict[str, Any] = field(default_factory=dict)
    time_s: float = 0.0
    schedule_met: Optional[bool] = None


@dataclass
class SolveTrace:
    """History of an outer loop plus its final iterate and stopping status."""
    solver: str
    lam: float
    iterates: List[IterationRecord] = field(default_factory=list)
    final_x: Optional[np.ndarray] = None
    status: str = ""

    @property
    def outer_iters(self) -> int:
        return len(self.iterates)

    @property
    def max_inexactness(self) -> float:
        return max((rec.inexactness for rec in self.iterates), default=0.0)

    @property
    def last_working_set(self) -> Tuple[int, ...]:
        return self.iterates[-1].working_set if self.iterates else ()

    @property
    def total_time(self) -> float:
        return float(sum(rec.time_s for rec in self.iterates))

    def summary(self) -> Dict[str, Any]:
        """Compact JSON-ready description (no full iterates)."""
        return {
            "solver": self.solver,
            "lambda": self.lam,
            "status": self.status,
            "outer_iters": self.outer_iters,
            "max_inexactness": self.max_inexactness,
            "time_s": self.total_time,
            "iterations": [
                {
                    "k": rec.k,
                    "selected": [i + 1 for i in rec.selected],
                    "working_set_size": len(rec.working_set),
                    "nnz": nnz_count(rec.x),
                    "inexactness": rec.inexactness,
                    "schedule_met": rec.schedule_met,
                    "inner": rec.inner_stats,
                }
                for rec in self.iterates
            ],
        }


def _check_length(x: np.ndarray, n: int, name: str = "x") -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != n:
        raise InvalidArgumentError(f"{name} must have length {n}, got shape {x.shape}")
    return x


def loss(instance: ProblemInstance, x: np.ndarray) -> float:
    """(1/(2m)) * ||Ax - b||^2."""
    x = _check_length(x, instance.n)
    residual = instance.A @ x - instance.b
    return float(residual @ residual) / (2.0 * instance.m)


def relative_error(x: np.ndarray, truth: GroundTruth) -> float:
    """||x - x_bar|| / ||x_bar||."""
    x = _check_length(x, truth.x_bar.shape[0])
    denominator = np.linalg.norm(truth.x_bar)
    if denominator == 0:
        raise InvalidArgumentError("relative error is undefined for x_bar = 0")
    return float(np.linalg.norm(x - truth.x_bar) / denominator)


def lambda_from_c(instance: ProblemInstance, c_lambda: float) -> float:
    """lam = (c_lambda / m) * ||A^T b||_inf."""
    return float(c_lambda) / instance.m * float(np.max(np.abs(instance.A.T @ instance.b)))


def top_r_support(x: np.ndarray, r: int) -> Tuple[int, ...]:
    """Indices of the r largest |x_i|; ties go to the smaller index."""
    x = np.asarray(x, dtype=np.float64)
    if r <= 0:
        return ()
    order = np.lexsort((np.arange(x.shape[0]), -np.abs(x)))
    return as_index_tuple(order[:r])


def nnz_threshold(x: np.ndarray) -> float:
    return 1e-8 * (1.0 + float(np.max(np.abs(x), initial=0.0)))


def nnz_count(x: np.ndarray, threshold: Optional[float] = None) -> int:
    x = np.asarray(x, dtype=np.float64)
    threshold = nnz_threshold(x) if threshold is None else threshold
    return int(np.count_nonzero(np.abs(x) > threshold))


@dataclass(frozen=True)
class SupportMetrics:
    top_r_match: bool
    exact_support_match: bool
    nnz: int


def support_metrics(x: np.ndarray, truth: GroundTruth, threshold: Optional[float] = None) -> SupportMetrics:
    """
    Compare the support of x with the true support.

    Args:
        x: Estimate
        truth: Ground truth
        threshold: nnz threshold (default 1e-8 * (1 + ||x||_inf))

    Returns:
        SupportMetrics: top-r match, exact support match, nnz
    """
    x = _check_length(x, truth.x_bar.shape[0])
    support = truth.support
    return SupportMetrics(
        top_r_match=top_r_support(x, truth.r) == support,
        exact_support_match=tuple(int(i) for i in np.flatnonzero(x)) == support,
        nnz=nnz_count(x, threshold),
    )


def validate_trace(trace: SolveTrace, n: int) -> List[str]:
    """
    Check the nested working-set invariants of a sequential truncated-l1 trace.

    T^0 = [n], each I^k is a subset of T^{k-1}, T^k = T^{k-1} minus I^k, and
    every non-terminal I^k is nonempty (so the I^k are pairwise disjoint).

    Returns:
        List[str]: Human-readable violations; empty when the trace is valid
    """
    problems: List[str] = []
    previous = set(range(n))
    seen: set = set()
    for position, record in enumerate(trace.iterates):
        selected = set(record.selected)
        terminal = position == len(trace.iterates) - 1
        if not selected <= previous:
            problems.append(f"k={record.k}: I^k is not contained in T^(k-1)")
        if selected & seen:
            problems.append(f"k={record.k}: I^k overlaps an earlier selection")
        if not terminal and not selected:
            problems.append(f"k={record.k}: empty I^k on a non-terminal iteration")
        if set(record.working_set) != previous - selected:
            problems.append(f"k={record.k}: T^k != T^(k-1) minus I^k")
        seen |= selected
        previous = set(record.working_set)
    return problems
