"""
Theory Diagnostics

Computes the constants that govern support identification for a given
design matrix and (when known) ground truth:

    - sparse_sigma(A, l)          smallest l-sparse singular value of A/sqrt(m)
                                  by exact support enumeration
    - sampled_sparse_sigma        non-certified upper estimate when the
                                  enumeration budget is exceeded
    - spectral_norm(A)            ||A|| by power iteration
    - kappa(A, S)                 max over nonempty S' in S, j not in S' of
                                  ||(A_S'^T A_S')^{-1} A_S'^T A_j||_1
    - m_hat, m_cap                l1 bound on subproblem solutions and the
                                  magnitude cap M
    - oracle_estimator(A, b, S)   least squares on the true support
    - theta_bounds                computable lower bounds on the feasible-set
                                  magnitude thresholds
    - lambda_floor                smallest admissible lambda
    - bound checks                operator-norm bound, oracle properties and
                                  the capped-difference scalar inequality

diagnose() packages everything into a DiagnosticsReport that serializes to
JSON with the field names below.

Budgets:
    Enumerations refuse to start when the number of submatrices exceeds the
    configured budget (analysis.sigma_budget, analysis.kappa_budget) and
    raise BudgetExceededError instead.
"""

import itertools
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from ..models.problem import GroundTruth, ProblemInstance, as_index_tuple
from ..utils.config import get_section
from ..utils.errors import BudgetExceededError, InvalidArgumentError, SingularSubmatrixError

VERDICT_SUFFICIENT = "theta-sufficient"
VERDICT_INDETERMINATE = "indeterminate"
VERDICT_VIOLATED = "violated"


def _sigma_min(columns: np.ndarray) -> float:
    if columns.shape[1] > columns.shape[0]:
        return 0.0
    return float(np.linalg.svd(columns, compute_uv=False)[-1])


def sparse_sigma(A: np.ndarray, l: int, budget: Optional[int] = None) -> float:
    """
    sigma_A(l) = min over |S| = l of sigma_min(A_S) / sqrt(m).

    Supports are enumerated in lexicographic order, so the minimum is
    bit-stable.

    Args:
        A: Design matrix (m x n)
        l: Support size, 1 <= l <= n
        budget: Maximum number of supports (default analysis.sigma_budget)

    Raises:
        InvalidArgumentError: l outside [1, n]
        BudgetExceededError: C(n, l) exceeds the budget
    """
    A = np.asarray(A, dtype=np.float64)
    m, n = A.shape
    if not 1 <= l <= n:
        raise InvalidArgumentError(f"support size must lie in [1, {n}], got {l}")
    if l > m:
        return 0.0
    budget = int(get_section("analysis")["sigma_budget"]) if budget is None else budget
    count = math.comb(n, l)
    if count > budget:
        raise BudgetExceededError(
            f"sigma_A({l}) needs {count} supports (budget {budget}); use sampled_sparse_sigma for a non-certified estimate",
            required=count, budget=budget,
        )
    best = math.inf
    for support in itertools.combinations(range(n), l):
        best = min(best, _sigma_min(A[:, support]))
        if best == 0.0:
            break
    return best / math.sqrt(m)


def sampled_sparse_sigma(A: np.ndarray, l: int, samples: int = 2000, seed: int = 0) -> float:
    """
    Minimum of sigma_min(A_S)/sqrt(m) over randomly sampled supports.

    This is an upper estimate of sigma_A(l), NOT a certified value.
    """
    A = np.asarray(A, dtype=np.float64)
    m, n = A.shape
    if not 1 <= l <= n:
        raise InvalidArgumentError(f"support size must lie in [1, {n}], got {l}")
    if l > m:
        return 0.0
    rng = np.random.default_rng(seed)
    best = math.inf
    for _ in range(samples):
        support = np.sort(rng.choice(n, size=l, replace=False))
        best = min(best, _sigma_min(A[:, support]))
    return best / math.sqrt(m)


def spectral_norm(A: np.ndarray, rtol: Optional[float] = None, max_iter: int = 5000) -> float:
    """||A||_2 by power iteration on A^T A from a fixed start; dense SVD if it stalls."""
    A = np.asarray(A, dtype=np.float64)
    rtol = float(get_section("analysis")["spectral_rtol"]) if rtol is None else rtol
    vector = np.random.default_rng(0).standard_normal(A.shape[1])
    norm = np.linalg.norm(vector)
    if norm == 0 or not np.any(A):
        return 0.0
    vector /= norm
    estimate = 0.0
    for _ in range(max_iter):
        image = A.T @ (A @ vector)
        value = np.linalg.norm(image)
        if value == 0:
            return 0.0
        vector = image / value
        new_estimate = math.sqrt(value)
        if abs(new_estimate - estimate) <= rtol * new_estimate:
            return float(new_estimate)
        estimate = new_estimate
    return float(np.linalg.norm(A, 2))


def _full_rank_gram(A_S: np.ndarray) -> np.ndarray:
    if A_S.shape[1] > A_S.shape[0] or np.linalg.matrix_rank(A_S) < A_S.shape[1]:
        raise SingularSubmatrixError(f"column submatrix of size {A_S.shape} is not injective")
    return A_S.T @ A_S


def kappa(A: np.ndarray, support: Sequence[int], budget: Optional[int] = None) -> float:
    """
    max over nonempty S' in support and j not in S' of ||(A_S'^T A_S')^{-1} A_S'^T A_j||_1.

    Raises:
        SingularSubmatrixError: Some A_S' lacks full column rank
        BudgetExceededError: 2^|support| exceeds the budget
    """
    A = np.asarray(A, dtype=np.float64)
    n = A.shape[1]
    support = as_index_tuple(support)
    budget = int(get_section("analysis")["kappa_budget"]) if budget is None else budget
    count = 2 ** len(support)
    if count > budget:
        raise BudgetExceededError(f"kappa needs {count} subsets (budget {budget})", required=count, budget=budget)
    best = 0.0
    for size in range(1, len(support) + 1):
        for subset in itertools.combinations(support, size):
            others = [j for j in range(n) if j not in subset]
            if not others:
                continue
            A_S = A[:, subset]
            gram = _full_rank_gram(A_S)
            coefficients = scipy.linalg.solve(gram, A_S.T @ A[:, others], assume_a="pos")
            best = max(best, float(np.max(np.sum(np.abs(coefficients), axis=0))))
    return best


def m_hat(A: np.ndarray, b: np.ndarray, lam: float, r: int, kappa_value: float, sigma_r: float) -> float:
    """(5+kappa)sqrt(r)||b|| / (2 sqrt(m) sigma_r) + 5||b||^2 (1+kappa) / (8 m lam)."""
    if not sigma_r > 0:
        raise InvalidArgumentError(f"sigma_A(r) must be positive, got {sigma_r}")
    if not lam > 0:
        raise InvalidArgumentError(f"lambda must be positive, got {lam}")
    m = np.asarray(A).shape[0]
    b_norm = float(np.linalg.norm(b))
    first = (5 + kappa_value) * math.sqrt(r) * b_norm / (2 * math.sqrt(m) * sigma_r)
    second = 5 * b_norm ** 2 * (1 + kappa_value) / (8 * m * lam)
    return first + second


def m_cap(A: np.ndarray, noise: np.ndarray, r: int, sigma_r: float, x_bar_inf: float) -> float:
    """M = ||x_bar||_inf + sqrt(r) / (m sigma_r) * ||A^T e||_inf; inf when sigma_r <= 0."""
    A = np.asarray(A, dtype=np.float64)
    if not sigma_r > 0:
        return math.inf
    m = A.shape[0]
    return float(x_bar_inf) + math.sqrt(r) / (m * sigma_r) * float(np.max(np.abs(A.T @ noise)))


def oracle_estimator(A: np.ndarray, b: np.ndarray, support: Sequence[int]) -> Tuple[np.ndarray, np.ndarray]:
    """
    Least squares restricted to the true support.

    Returns:
        Tuple: (x_o, certificate) where certificate = A_S^T (A x_o - b),
        which vanishes up to rounding

    Raises:
        SingularSubmatrixError: A_S lacks full column rank
    """
    A = np.asarray(A, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    support = list(as_index_tuple(support))
    x = np.zeros(A.shape[1])
    if not support:
        return x, np.zeros(0)
    A_S = A[:, support]
    gram = _full_rank_gram(A_S)
    x[support] = scipy.linalg.solve(gram, A_S.T @ b, assume_a="pos")
    return x, A_S.T @ (A @ x - b)


def residual_radius(noise_norm: float, m: int, lam: float, varsigma0: float, x_bar_l1: float) -> float:
    """sqrt(||e||^2 + 2 m lam (1 + varsigma0) ||x_bar||_1)."""
    return math.sqrt(noise_norm ** 2 + 2 * m * lam * (1 + varsigma0) * x_bar_l1)


@dataclass
class ThetaBounds:
    values: List[float]
    hypotheses_verified: bool
    sigma_values: Dict[int, float] = field(default_factory=dict)
    spectral_norm: float = 0.0


def theta_bounds(
    A: np.ndarray,
    noise_norm: float,
    lam: float,
    varsigma0: float,
    r: int,
    x_bar_r: float,
    x_bar_l1: float,
    budget: Optional[int] = None,
    sigma_values: Optional[Dict[int, float]] = None,
) -> ThetaBounds:
    """
    Lower bounds theta_0..theta_{r-1} on the magnitude thresholds.

    theta_k = [sigma_A(r+k) sqrt(m(r-k)) |x_bar|_r - ||e|| - radius] / (sqrt(n-k) ||A||)

    The hypotheses (sigma_A(2r-1) > 0 and |x_bar|_r large enough) are checked
    and reported; formula values are returned either way.

    Args:
        x_bar_r: r-th largest magnitude of x_bar
        sigma_values: Already computed sigma_A(l) values to reuse
    """
    A = np.asarray(A, dtype=np.float64)
    m, n = A.shape
    if r < 1:
        raise InvalidArgumentError("theta bounds need r >= 1")
    sigmas = dict(sigma_values or {})

    def sigma(l: int) -> float:
        if l > n:
            return 0.0
        if l not in sigmas:
            sigmas[l] = sparse_sigma(A, l, budget)
        return sigmas[l]

    norm = spectral_norm(A)
    radius = residual_radius(noise_norm, m, lam, varsigma0, x_bar_l1)
    values = []
    for k in range(r):
        numerator = sigma(r + k) * math.sqrt(m * (r - k)) * x_bar_r - noise_norm - radius
        values.append(numerator / (math.sqrt(n - k) * norm) if norm > 0 else -math.inf)

    sigma_2r = sigma(2 * r - 1)
    verified = sigma_2r > 0 and x_bar_r > (
        2 * noise_norm + math.sqrt(2 * m * lam * (1 + varsigma0) * x_bar_l1)
    ) / (math.sqrt(m) * sigma_2r)
    return ThetaBounds(values=values, hypotheses_verified=bool(verified), sigma_values=sigmas, spectral_norm=norm)


def lambda_floor(A: np.ndarray, support: Sequence[int], noise: np.ndarray, gamma: float) -> float:
    """
    (2 / (m(1-gamma))) * ||A_{S^c}^T (E - P_S) e||_inf, P_S the projector onto range(A_S).

    Raises:
        SingularSubmatrixError: A_S lacks full column rank
    """
    if not 0 < gamma < 1:
        raise InvalidArgumentError(f"gamma must lie in (0, 1), got {gamma}")
    A = np.asarray(A, dtype=np.float64)
    noise = np.asarray(noise, dtype=np.float64)
    m, n = A.shape
    support = list(as_index_tuple(support))
    complement = [j for j in range(n) if j not in set(support)]
    if not complement:
        return 0.0
    projected = noise
    if support:
        A_S = A[:, support]
        gram = _full_rank_gram(A_S)
        projected = noise - A_S @ scipy.linalg.solve(gram, A_S.T @ noise, assume_a="pos")
    return 2.0 / (m * (1 - gamma)) * float(np.max(np.abs(A[:, complement].T @ projected)))


def identification_threshold(m_hat_value: float, xi_inf: float, lam: float, r: int,
                             tau: float, gamma: float) -> float:
    """(18 M_hat ||xi||_inf + 5 lam r tau^2) / (3 (1 - gamma))."""
    return (18 * m_hat_value * xi_inf + 5 * lam * r * tau ** 2) / (3 * (1 - gamma))


def assumption_verdict(
    sigma_2r: float,
    mu: float,
    m_cap_value: float,
    lam: float,
    lambda_floor_value: float,
    varsigma0: float,
    kappa_value: float,
    gamma: float,
    tau: float,
    rho: float,
    m_hat_value: float,
    r: int,
    theta_last: Optional[float],
) -> str:
    """
    Check the standing assumption of the support-identification guarantees.

    Returns "violated" when a directly checkable part fails,
    "theta-sufficient" when theta_{r-1} already exceeds the required
    magnitude threshold, and "indeterminate" otherwise (the exact threshold
    is a nonconvex quantity).
    """
    if sigma_2r <= 0 or mu < m_cap_value or lam < lambda_floor_value:
        return VERDICT_VIOLATED
    if varsigma0 > (1 - gamma) / (5 * (1 + kappa_value)):
        return VERDICT_VIOLATED
    required = identification_threshold(m_hat_value, varsigma0, lam, r, tau, gamma) / rho
    if theta_last is not None and theta_last > required:
        return VERDICT_SUFFICIENT
    return VERDICT_INDETERMINATE


# Bound and oracle checks

def restricted_pinv_norm(A: np.ndarray, columns: Sequence[int]) -> float:
    """sqrt(m) * ||(A_J^T A_J)^{-1} A_J^T|| = sqrt(m) / sigma_min(A_J)."""
    A = np.asarray(A, dtype=np.float64)
    smallest = _sigma_min(A[:, list(columns)])
    if smallest == 0:
        raise SingularSubmatrixError("restricted pseudo-inverse of a rank-deficient submatrix")
    return math.sqrt(A.shape[0]) / smallest


def operator_norm_check(A: np.ndarray, support: Sequence[int], sigma_r: Optional[float] = None) -> Dict[str, Any]:
    """For every nonempty J in the support: sqrt(m)||(A_J^T A_J)^{-1}A_J^T|| <= 1/sigma_A(r)."""
    support = as_index_tuple(support)
    sigma_r = sparse_sigma(A, len(support)) if sigma_r is None else sigma_r
    worst = 0.0
    for size in range(1, len(support) + 1):
        for subset in itertools.combinations(support, size):
            worst = max(worst, restricted_pinv_norm(A, subset))
    bound = 1.0 / sigma_r if sigma_r > 0 else math.inf
    return {"max_value": worst, "bound": bound, "holds": worst <= bound * (1 + 1e-10)}


def oracle_checks(A: np.ndarray, b: np.ndarray, truth: GroundTruth, lam: float,
                  kappa_value: float, sigma_r: float) -> Dict[str, Any]:
    """
    Properties of the oracle estimator:
        - normal-equation residual ||A_S^T(A x_o - b)||_inf ~ 0
        - ||x_o||_1 <= 0.8 * M_hat
        - ||x_bar - x_o||_1 <= r ||A_S^T e||_inf / (m sigma_A(r)^2)
    """
    A = np.asarray(A, dtype=np.float64)
    m = A.shape[0]
    support = list(truth.support)
    x_o, certificate = oracle_estimator(A, b, support)
    noise = truth.noise_or_zero(m)
    hat = m_hat(A, b, lam, truth.r, kappa_value, sigma_r)
    distance = float(np.sum(np.abs(truth.x_bar - x_o)))
    distance_bound = truth.r * float(np.max(np.abs(A[:, support].T @ noise), initial=0.0)) / (m * sigma_r ** 2)
    residual = float(np.max(np.abs(certificate), initial=0.0))
    return {
        "normal_residual": residual,
        "x_o_l1": float(np.sum(np.abs(x_o))),
        "m_hat": hat,
        "l1_bound_holds": float(np.sum(np.abs(x_o))) <= 0.8 * hat,
        "distance": distance,
        "distance_bound": distance_bound,
        "distance_bound_holds": distance <= distance_bound * (1 + 1e-9) + 1e-12,
    }


def capped_difference_holds(a, w, M) -> np.ndarray:
    """|a| <= M implies |a| - |a + w| <= min(|w|, 2M - |w|); vectorized."""
    a, w, M = (np.asarray(v, dtype=np.float64) for v in (a, w, M))
    lhs = np.abs(a) - np.abs(a + w)
    rhs = np.minimum(np.abs(w), 2 * M - np.abs(w))
    return (np.abs(a) > M) | (lhs <= rhs + 1e-12 * (1 + np.abs(M)))


def observed_beta_values(iterates: Sequence[np.ndarray], A: np.ndarray, b: np.ndarray,
                         radius: float, r: int) -> List[List[float]]:
    """
    Sorted magnitudes |x|_1..|x|_r of every iterate inside the residual ball
    ||Ax - b|| <= radius. These are observed values only, not bounds.
    """
    A = np.asarray(A, dtype=np.float64)
    observed = []
    for x in iterates:
        if np.linalg.norm(A @ x - b) <= radius * (1 + 1e-12):
            magnitudes = np.sort(np.abs(x))[::-1]
            observed.append([float(v) for v in magnitudes[:r]])
    return observed


@dataclass
class DiagnosticsReport:
    sigma_a: Dict[int, float] = field(default_factory=dict)
    kappa: Optional[float] = None
    m_hat: Optional[float] = None
    m_cap: Optional[float] = None
    theta: Optional[List[float]] = None
    theta_hypotheses_verified: Optional[bool] = None
    lambda_floor: Optional[float] = None
    oracle: Optional[List[float]] = None
    nsp_verdicts: List[Dict[str, Any]] = field(default_factory=list)
    beta0_exact: Optional[float] = None
    spectral_norm: Optional[float] = None
    assumption: Optional[str] = None
    notes: Dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def diagnose(
    instance: ProblemInstance,
    truth: Optional[GroundTruth],
    lam: float,
    gamma: float = 0.5,
    tau: float = 200.0,
    mu: float = 1e3,
    rho: float = 0.2,
    varsigma0: float = 0.0,
    nsp_queries: Sequence[Any] = (),
    config: Optional[Dict[str, Any]] = None,
    seed: int = 0,
) -> DiagnosticsReport:
    """
    Build a DiagnosticsReport for an instance.

    Support-dependent quantities need ground truth; without it they stay
    None and notes records the reason. Budget overruns are recorded the same
    way instead of aborting the report.
    """
    from .nsp import beta0_exact_1d, nsp_witness_search

    section = get_section("analysis", config)
    sigma_budget = int(section["sigma_budget"])
    A, b = instance.A, instance.b
    m, n = A.shape
    report = DiagnosticsReport()
    report.spectral_norm = spectral_norm(A, section["spectral_rtol"])

    for query in nsp_queries:
        verdict = nsp_witness_search(A, query, int(section["witness_budget"]), seed=seed)
        report.nsp_verdicts.append(verdict.to_dict())

    beta0 = beta0_exact_1d(A, b, lam, varsigma0)
    report.beta0_exact = beta0.value
    if beta0.value is None:
        report.notes["beta0_exact"] = beta0.reason

    if truth is None or truth.r == 0:
        for name in ("kappa", "m_hat", "m_cap", "theta", "lambda_floor", "oracle", "assumption"):
            report.notes[name] = "ground truth unavailable"
        return report

    r = truth.r
    support = truth.support
    noise = truth.noise_or_zero(m)
    try:
        for l in range(r, min(2 * r - 1, n) + 1):
            report.sigma_a[l] = sparse_sigma(A, l, sigma_budget)
    except BudgetExceededError as e:
        report.notes["sigma_a"] = str(e)

    sigma_r = report.sigma_a.get(r)
    try:
        x_o, _ = oracle_estimator(A, b, support)
        report.oracle = [float(v) for v in x_o]
        report.lambda_floor = lambda_floor(A, support, noise, gamma)
    except SingularSubmatrixError as e:
        report.notes["oracle"] = str(e)
    try:
        report.kappa = kappa(A, support, int(section["kappa_budget"]))
    except (SingularSubmatrixError, BudgetExceededError) as e:
        report.notes["kappa"] = str(e)

    if sigma_r is not None and sigma_r > 0:
        report.m_cap = m_cap(A, noise, r, sigma_r, float(np.max(np.abs(truth.x_bar))))
        if report.kappa is not None:
            report.m_hat = m_hat(A, b, lam, r, report.kappa, sigma_r)
    else:
        report.notes["m_hat"] = "sigma_A(r) unavailable or zero"

    magnitudes = np.sort(np.abs(truth.x_bar))[::-1]
    try:
        bounds = theta_bounds(A, float(np.linalg.norm(noise)), lam, varsigma0, r, float(magnitudes[r - 1]),
                              float(np.sum(magnitudes)), sigma_budget, report.sigma_a)
        report.theta = bounds.values
        report.theta_hypotheses_verified = bounds.hypotheses_verified
        report.sigma_a.update(bounds.sigma_values)
    except BudgetExceededError as e:
        report.notes["theta"] = str(e)

    sigma_2r = report.sigma_a.get(min(2 * r - 1, n))
    if None in (sigma_2r, report.m_cap, report.lambda_floor, report.kappa, report.m_hat):
        report.notes["assumption"] = "inputs unavailable"
    else:
        report.assumption = assumption_verdict(
            sigma_2r, mu, report.m_cap, lam, report.lambda_floor, varsigma0, report.kappa,
            gamma, tau, rho, report.m_hat, r, report.theta[-1] if report.theta else None,
        )
    return report
