"""
Null-space property witness search

For a design matrix A, looks for vectors d that violate one of the
null-space inequalities (S a support of size r, S^c its complement):

    robust NSP   sum_{S} |d_i|                   <= gamma*||d_{S^c}||_1 + tau*sqrt(r/m)*||Ad||
    rRNSP(l,eta) sum_{I} min(|d_i|, 2M - |d_i|)  <= gamma*||d_{S^c}||_1 + tau*sqrt(r/m)*||Ad||
                 for I in S, |I| = l, and ||d_{S^c}||_inf >= eta
    rSRNSP       rRNSP(l, alpha_{r-l}) for every l = 1..r
    REC(c)       chi(c) = min ||Ad||/sqrt(m) over unit d in the cone
                 ||d_{S^c}||_1 <= c*||d_S||_1 (violated when chi(c) = 0)

Candidates d come from the null space of A (basis vectors and random
combinations), null vectors of random column subsets, and random unit
vectors. For each d the worst support is found by sorting.

A "violated" verdict carries its witness and is a proof. A
"no-violation-found" verdict only says the search budget was spent; it is
NOT a certificate that the property holds.

beta0_exact_1d() computes the smallest sup-norm over the Lasso solution set
when A has a one-dimensional null space.

Indices in witnesses are 0-based.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, Optional, Tuple

import numpy as np
import scipy.linalg
from scipy.optimize import minimize_scalar

from ..models.problem import ProblemInstance, SeparablePenalty, top_r_support
from ..solver.ssnal import SsnalCaps, solve_subproblem
from ..utils.errors import InvalidArgumentError

KIND_NSP = "robust-nsp"
KIND_RRNSP = "rrnsp"
KIND_RSRNSP = "rsrnsp"
KIND_REC = "rec"
QUERY_KINDS = (KIND_NSP, KIND_RRNSP, KIND_RSRNSP, KIND_REC)

LABEL_VIOLATED = "violated-with-witness"
LABEL_NOT_FOUND = "no-violation-found"

# slack so rounding on exact-equality cases is not reported as a violation
VIOLATION_TOL = 1e-10


@dataclass(frozen=True)
class NspQuery:
    """
    One property to test.

    kind: robust-nsp | rrnsp | rsrnsp | rec
    r: order; l, eta: rRNSP subset size and threshold; M: magnitude cap;
    gamma, tau: constants of the inequality; alpha: nonincreasing array of
    length r for rSRNSP; c: cone constant for REC.
    """
    kind: str
    r: int
    gamma: float = 0.5
    tau: float = 1.0
    l: Optional[int] = None
    eta: float = 0.0
    M: float = 1.0
    alpha: Optional[Tuple[float, ...]] = None
    c: float = 2.0

    def __post_init__(self) -> None:
        if self.kind not in QUERY_KINDS:
            raise InvalidArgumentError(f"query kind must be one of {QUERY_KINDS}, got {self.kind!r}")
        if self.r < 1:
            raise InvalidArgumentError("order r must be at least 1")
        if self.kind == KIND_REC:
            if not self.c > 0:
                raise InvalidArgumentError("REC constant c must be positive")
            return
        if not 0 < self.gamma < 1:
            raise InvalidArgumentError(f"gamma must lie in (0, 1), got {self.gamma}")
        if not self.tau > 0:
            raise InvalidArgumentError(f"tau must be positive, got {self.tau}")
        if not self.M > 0:
            raise InvalidArgumentError(f"M must be positive, got {self.M}")
        if self.kind == KIND_RRNSP:
            if self.l is None or not 1 <= self.l <= self.r:
                raise InvalidArgumentError(f"rRNSP needs 1 <= l <= r, got l={self.l}")
            if self.eta < 0:
                raise InvalidArgumentError("eta must be nonnegative")
        if self.kind == KIND_RSRNSP:
            alpha = tuple(float(a) for a in (self.alpha or ()))
            if len(alpha) != self.r:
                raise InvalidArgumentError(f"rSRNSP needs an alpha array of length r={self.r}")
            if any(a < 0 for a in alpha) or any(b > a for a, b in zip(alpha, alpha[1:])):
                raise InvalidArgumentError("alpha must be nonnegative and nonincreasing")
            object.__setattr__(self, "alpha", alpha)

    @classmethod
    def for_identification(cls, r: int, l: int, eta: float, M: float, rho: float, nu: float) -> "NspQuery":
        """rRNSP query in the (rho, nu) naming used by the identification bound."""
        return cls(kind=KIND_RRNSP, r=r, l=l, eta=eta, M=M, gamma=rho, tau=nu)

    def to_dict(self) -> Dict[str, Any]:
        return {k: v for k, v in self.__dict__.items() if v is not None}


@dataclass
class NspVerdict:
    query: NspQuery
    violated: bool
    candidates_checked: int
    budget: int
    witness: Optional[List[float]] = None
    support: Optional[List[int]] = None
    subset: Optional[List[int]] = None
    l: Optional[int] = None
    lhs: Optional[float] = None
    rhs: Optional[float] = None
    chi_estimate: Optional[float] = None
    nsp_also_violated: Optional[bool] = None

    @property
    def label(self) -> str:
        return LABEL_VIOLATED if self.violated else LABEL_NOT_FOUND

    def to_dict(self) -> Dict[str, Any]:
        data = {
            "query": self.query.to_dict(),
            "verdict": self.label,
            "certified": self.violated,
            "candidates_checked": self.candidates_checked,
            "budget": self.budget,
        }
        for name in ("witness", "support", "subset", "l", "lhs", "rhs", "chi_estimate", "nsp_also_violated"):
            value = getattr(self, name)
            if value is not None:
                data[name] = value
        return data


@dataclass
class _Check:
    violated: bool
    lhs: float
    rhs: float
    d: np.ndarray
    support: Tuple[int, ...]
    subset: Tuple[int, ...] = ()


def _residual_term(A: np.ndarray, d: np.ndarray, r: int, tau: float) -> float:
    m = A.shape[0]
    return tau * math.sqrt(r / m) * float(np.linalg.norm(A @ d))


def robust_nsp_check(A: np.ndarray, d: np.ndarray, r: int, gamma: float, tau: float,
                     support: Optional[Tuple[int, ...]] = None) -> _Check:
    """Robust-NSP inequality on d for S (default: the r largest |d_i|)."""
    S = top_r_support(d, r) if support is None else support
    mask = np.zeros(d.shape[0], dtype=bool)
    mask[list(S)] = True
    lhs = float(np.sum(np.abs(d[mask])))
    rhs = gamma * float(np.sum(np.abs(d[~mask]))) + _residual_term(A, d, r, tau)
    return _Check(lhs > rhs + VIOLATION_TOL * (1 + lhs), lhs, rhs, d, S)


def _rrnsp_scales(d: np.ndarray, S: Tuple[int, ...], mask: np.ndarray, eta: float, M: float) -> List[float]:
    outside = float(np.max(np.abs(d[~mask]), initial=0.0))
    if outside == 0:
        return [1.0] if eta == 0 else []
    floor = eta / outside if eta > 0 else 0.0
    scales = {1.0, 2.0 * floor, 5.0 * floor} if floor == 0 else {floor, 2.0 * floor, 5.0 * floor}
    for i in S:
        if d[i] != 0:
            scales.add(M / abs(d[i]))
    return sorted(s for s in scales if s >= floor and s > 0)


def rrnsp_check(A: np.ndarray, d: np.ndarray, r: int, l: int, eta: float, M: float,
                gamma: float, tau: float) -> Optional[_Check]:
    """
    rRNSP inequality on scalings of d, S = the r largest |d_i|, I = the l
    entries of S with the largest min(|d_i|, 2M - |d_i|).

    Returns the first violating check, else the tightest non-violating one,
    or None when no scaling meets the eta constraint.
    """
    S = top_r_support(d, r)
    mask = np.zeros(d.shape[0], dtype=bool)
    mask[list(S)] = True
    best: Optional[_Check] = None
    for scale in _rrnsp_scales(d, S, mask, eta, M):
        scaled = scale * d
        capped = {i: min(abs(scaled[i]), 2 * M - abs(scaled[i])) for i in S}
        subset = tuple(sorted(sorted(S, key=lambda i: (-capped[i], i))[:l]))
        lhs = float(sum(capped[i] for i in subset))
        rhs = gamma * float(np.sum(np.abs(scaled[~mask]))) + _residual_term(A, scaled, r, tau)
        check = _Check(lhs > rhs + VIOLATION_TOL * (1 + abs(lhs)), lhs, rhs, scaled, S, subset)
        if check.violated:
            return check
        if best is None or lhs - rhs > best.lhs - best.rhs:
            best = check
    return best


def _candidates(A: np.ndarray, budget: int, rng: np.random.Generator) -> Iterator[Tuple[np.ndarray, bool]]:
    """Yield (d, from_null_space) pairs, at most budget of them."""
    m, n = A.shape
    produced = 0
    basis = scipy.linalg.null_space(A)
    for column in basis.T:
        if produced >= budget:
            return
        produced += 1
        yield column, True
    if basis.shape[1] > 1:
        for _ in range(budget // 4):
            if produced >= budget:
                return
            d = basis @ rng.standard_normal(basis.shape[1])
            produced += 1
            yield d / np.linalg.norm(d), True
    size = min(m + 1, n)
    for _ in range(budget // 4):
        if produced >= budget:
            return
        columns = np.sort(rng.choice(n, size=size, replace=False))
        local = scipy.linalg.null_space(A[:, columns])
        if local.shape[1] == 0:
            continue
        d = np.zeros(n)
        d[columns] = local @ rng.standard_normal(local.shape[1])
        produced += 1
        yield d / np.linalg.norm(d), True
    while produced < budget:
        d = rng.standard_normal(n)
        produced += 1
        yield d / np.linalg.norm(d), False


def _rec_search(A: np.ndarray, query: NspQuery, budget: int, rng: np.random.Generator) -> NspVerdict:
    m, n = A.shape
    r = min(query.r, n)
    chi = math.inf
    checked = 0
    for d, from_null in _candidates(A, budget, rng):
        checked += 1
        S = top_r_support(d, r)
        mask = np.zeros(n, dtype=bool)
        mask[list(S)] = True
        if np.sum(np.abs(d[~mask])) > query.c * np.sum(np.abs(d[mask])):
            continue
        ratio = float(np.linalg.norm(A @ d)) / (math.sqrt(m) * float(np.linalg.norm(d)))
        if from_null and ratio <= VIOLATION_TOL:
            return NspVerdict(query, True, checked, budget, witness=d.tolist(), support=list(S), chi_estimate=0.0)
        chi = min(chi, ratio)
    # vectors supported on S lie in every cone
    for _ in range(min(budget, 200)):
        S = np.sort(rng.choice(n, size=r, replace=False))
        _, singular, vt = np.linalg.svd(A[:, S], full_matrices=True)
        smallest = singular[-1] if len(singular) == r else 0.0
        checked += 1
        chi = min(chi, float(smallest) / math.sqrt(m))
    return NspVerdict(query, False, checked, budget, chi_estimate=chi)


def nsp_witness_search(A: np.ndarray, query: NspQuery, search_budget: int = 2000, seed: int = 0) -> NspVerdict:
    """
    Search for a vector violating the queried property.

    Args:
        A: Design matrix
        query: Property and constants
        search_budget: Number of candidate directions
        seed: RNG seed for random candidates

    Returns:
        NspVerdict: violated with witness, or no-violation-found with the
        budget spent (never raises for a well-formed query)
    """
    A = np.asarray(A, dtype=np.float64)
    rng = np.random.default_rng(seed)
    if query.kind == KIND_REC:
        return _rec_search(A, query, search_budget, rng)

    r = min(query.r, A.shape[1])
    if query.kind == KIND_RSRNSP:
        levels = [(l, query.alpha[r - l]) for l in range(1, r + 1)]
    elif query.kind == KIND_RRNSP:
        levels = [(query.l, query.eta)]
    else:
        levels = []

    checked = 0
    for d, _ in _candidates(A, search_budget, rng):
        checked += 1
        if query.kind == KIND_NSP:
            check = robust_nsp_check(A, d, r, query.gamma, query.tau)
            if check.violated:
                return NspVerdict(query, True, checked, search_budget, witness=check.d.tolist(),
                                  support=list(check.support), lhs=check.lhs, rhs=check.rhs)
            continue
        for l, eta in levels:
            check = rrnsp_check(A, d, r, l, eta, query.M, query.gamma, query.tau)
            if check is not None and check.violated:
                also = robust_nsp_check(A, check.d, r, query.gamma, query.tau, check.support).violated
                return NspVerdict(query, True, checked, search_budget, witness=check.d.tolist(),
                                  support=list(check.support), subset=list(check.subset), l=l,
                                  lhs=check.lhs, rhs=check.rhs, nsp_also_violated=also)
    return NspVerdict(query, False, checked, search_budget)


@dataclass
class Beta0Result:
    value: Optional[float]
    reason: str = ""
    interval: Optional[Tuple[float, float]] = None
    null_direction: Optional[List[float]] = field(default=None, repr=False)


def _lasso_point(A: np.ndarray, b: np.ndarray, lam: float, tol: float) -> np.ndarray:
    instance = ProblemInstance(A, b)
    penalty = SeparablePenalty.lasso(instance.n, lam)
    return solve_subproblem(instance, penalty, tol=tol, caps=SsnalCaps(max_outer=400)).x_out


def beta0_exact_1d(A: np.ndarray, b: np.ndarray, lam: float, varsigma0: float = 0.0,
                   tol: float = 1e-11, exact_limit: int = 200) -> Beta0Result:
    """
    Smallest ||z||_inf over the Lasso solution set when dim Null(A) <= 1.

    The solution set is {x* + s*d : ||x* + s*d||_1 minimal} for one solution
    x* and the null direction d; the minimizing s form an interval found from
    the breakpoints of s -> ||x* + s*d||_1. ||x* + s*d||_inf is then minimized
    over that interval (exactly from pairwise crossing points when
    n <= exact_limit, else by bounded scalar search).

    Returns:
        Beta0Result: value None with a reason when the preconditions fail
    """
    if varsigma0 != 0:
        return Beta0Result(None, "only varsigma0 = 0 is supported")
    A = np.asarray(A, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    basis = scipy.linalg.null_space(A)
    if basis.shape[1] > 1:
        return Beta0Result(None, f"null space has dimension {basis.shape[1]} > 1")
    x = _lasso_point(A, b, lam, tol)
    if basis.shape[1] == 0:
        return Beta0Result(float(np.max(np.abs(x))), interval=(0.0, 0.0))

    d = basis[:, 0]
    moving = d != 0
    breaks = np.concatenate([-x[moving] / d[moving], [0.0]])
    l1_values = np.abs(x[None, :] + breaks[:, None] * d[None, :]).sum(axis=1)
    l1_min = float(l1_values.min())
    flat = breaks[l1_values <= l1_min + 1e-9 * (1 + l1_min)]
    lo, hi = float(flat.min()), float(flat.max())

    def sup_norm(s: float) -> float:
        return float(np.max(np.abs(x + s * d)))

    if x.shape[0] <= exact_limit:
        candidates = [lo, hi]
        for sign in (1.0, -1.0):
            numerator = -(x[:, None] - sign * x[None, :])
            denominator = d[:, None] - sign * d[None, :]
            with np.errstate(divide="ignore", invalid="ignore"):
                crossings = numerator / denominator
            crossings = crossings[np.isfinite(crossings)]
            candidates.extend(crossings[(crossings >= lo) & (crossings <= hi)].tolist())
        value = min(sup_norm(s) for s in candidates)
    else:
        result = minimize_scalar(sup_norm, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
        value = min(float(result.fun), sup_norm(lo), sup_norm(hi))
    return Beta0Result(value, interval=(lo, hi), null_direction=d.tolist())
