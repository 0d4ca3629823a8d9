"""
Acceptance checks run by `verify`

Each check returns a CheckResult with status PASS, FAIL or SKIP. The toy
checks compare against closed-form trajectories, the kernel suites against
finite differences and dense solves, and the synthetic checks against the
ground truth of seeded instances.

CHECKS:
-------
 1  toy-trajectory-exam41      driver iterates on the 3x4 toy instance
 2  baseline-contrast-exam41   LLA-SCAD and MSCR-cL1 stall at (2+e, 2, 0, 6-e)
 3  toy-trajectory-exam42      driver iterates on the 4x5 toy, Lasso segment
 4  nsp-diagnostics-exam31     witnesses, REC, exact beta_0, sparse sigma
 5  moreau-identity, prox-nonexpansive, envelope-gradient, grad-phi,
    newton-direction            kernel property suites
 6  ssnal-convergence           50 random truncated-l1 subproblems
 7  restricted-pinv-bound, oracle-properties, capped-difference
 8  synthetic-recovery          seeded presets (slow, --full only)
 9  theta-consistency           magnitude bounds on solver iterates (--full only)
10  determinism-io              sweep CSV bytes, LIBSVM round trip, poly counts

A check that raises is reported as FAIL with the exception text.

Example:
    results = run_checks(VerifyOptions(full=False))
    failed = [r for r in results if r.status == FAIL]
"""

import math
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..analysis import diagnostics
from ..analysis.nsp import KIND_NSP, KIND_REC, NspQuery, beta0_exact_1d, nsp_witness_search
from ..data.libsvm_io import read_libsvm, write_libsvm
from ..data.poly_expand import poly_column_count, poly_expand
from ..data.synthetic import gen_synthetic, preset_spec
from ..data.toy_instances import exam31, exam31_lasso_distance, exam41, exam42
from ..models.problem import (
    GroundTruth, ProblemInstance, SeparablePenalty, SolverOptions, lambda_from_c,
    relative_error, support_metrics, validate_trace,
)
from ..solver import baselines, iscra, prox, ssnal
from ..utils.csv_utils import METRICS_HEADER, read_csv_rows, write_metrics_csv
from ..utils.errors import BudgetExceededError
from .sweep import SweepPlan, run_sweep

PASS = "PASS"
FAIL = "FAIL"
SKIP = "SKIP"

TOY_TOL = 1e-6
EXACT_INNER_TOL = 1e-10


@dataclass(frozen=True)
class VerifyOptions:
    lam41: float = 0.1
    e41: float = 0.05
    rho41: float = 0.8
    lam42: float = 0.1
    full: bool = False
    seed: int = 0
    recovery_seeds: int = 10


@dataclass
class CheckResult:
    number: int
    name: str
    status: str
    detail: str = ""
    elapsed: float = 0.0


class CheckFailed(Exception):
    """Raised inside a check to report FAIL with a message."""


class CheckSkipped(Exception):
    """Raised inside a check to report SKIP with a reason."""


def _expect(condition: bool, message: str) -> None:
    if not condition:
        raise CheckFailed(message)


def _close(actual: np.ndarray, expected: Sequence[float], tol: float, what: str) -> None:
    gap = float(np.max(np.abs(np.asarray(actual) - np.asarray(expected, dtype=np.float64))))
    _expect(gap <= tol, f"{what}: max deviation {gap:.3g} > {tol:g}")


def exam41_band(e: float) -> Tuple[float, float]:
    """lambda range in which the toy-41 closed forms hold."""
    return e / 3.0, 2.0 / 6.7


# 1-4: toy instances

def check_toy_exam41(options: VerifyOptions) -> str:
    lam, e = options.lam41, options.e41
    low, high = exam41_band(e)
    if not low <= lam <= high or not 0.5 <= options.rho41 <= 1:
        raise CheckSkipped(f"lambda={lam:g}, rho={options.rho41:g} outside [{low:.4g}, {high:.4g}] x [0.5, 1]")
    instance, truth = exam41(e)
    solver_options = SolverOptions(lam=lam, rho=options.rho41, mu=1e3, epsilon=0.0,
                                   inner_tolerance=EXACT_INNER_TOL, termination="theory")
    trace = iscra.run(instance, solver_options)
    _expect(trace.outer_iters >= 3, f"expected at least 3 subproblems, got {trace.outer_iters}")
    _close(trace.iterates[0].x, (2 + e, 2 - 3 * lam, 0, 6 - e - 3 * lam), TOY_TOL, "x^1")
    _expect(trace.iterates[0].selected == (3,), f"I^1 = {trace.iterates[0].selected}, expected (3,)")
    _close(trace.iterates[1].x, (e, 0, 2 - 3 * lam, 10 - e), TOY_TOL, "x^2")
    _expect(trace.iterates[1].selected == (2,), f"I^2 = {trace.iterates[1].selected}, expected (2,)")
    _close(trace.iterates[2].x, (0, 0, 2 + e, 10 + e), TOY_TOL, "x^3")
    _close(trace.final_x, (0, 0, 2 + e, 10 + e), TOY_TOL, "final iterate")
    _expect(not validate_trace(trace, instance.n), "trace invariants violated")
    return f"oracle reached in {trace.outer_iters} subproblems"


def check_contrast_exam41(options: VerifyOptions) -> str:
    lam, e = options.lam41, options.e41
    low, high = exam41_band(e)
    if not low <= lam <= high:
        raise CheckSkipped(f"lambda={lam:g} outside the admissible band [{low:.4g}, {high:.4g}]")
    instance, truth = exam41(e)
    stall = (2 + e, 2, 0, 6 - e)
    oracle, _ = diagnostics.oracle_estimator(instance.A, instance.b, truth.support)
    base = baselines.BaselineOptions(lam=lam, scad_a=3.7, inner_tolerance=EXACT_INNER_TOL, rel_change_tol=1e-9)
    errors = {}
    for name, trace in (("lla-scad", baselines.lla(instance, base, "scad")),
                        ("mscr-cl1", baselines.mscr_cl1(instance, base))):
        _close(trace.final_x, stall, TOY_TOL, name)
        errors[name] = float(np.linalg.norm(trace.final_x - oracle) / np.linalg.norm(oracle))
        _expect(errors[name] > 0.1, f"{name} relative error to the oracle is only {errors[name]:.3g}")
    ours = iscra.run(instance, SolverOptions(lam=lam, rho=0.8, inner_tolerance=EXACT_INNER_TOL, termination="theory"))
    own_error = float(np.linalg.norm(ours.final_x - oracle) / np.linalg.norm(oracle))
    _expect(own_error < 1e-6, f"iscra relative error to the oracle {own_error:.3g}")
    return ", ".join(f"{k} err={v:.3f}" for k, v in errors.items()) + f", iscra err={own_error:.1e}"


def check_toy_exam42(options: VerifyOptions) -> str:
    lam = options.lam42
    if not 0 < lam < 0.25:
        raise CheckSkipped(f"lambda={lam:g} outside (0, 1/4)")
    instance, _ = exam42()
    trace = iscra.run(instance, SolverOptions(lam=lam, rho=0.2, mu=1e3, epsilon=0.0,
                                              inner_tolerance=EXACT_INNER_TOL, termination="theory"))
    _expect(trace.iterates[0].selected == (1,), f"I^1 = {trace.iterates[0].selected}, expected (1,)")
    distance = exam31_lasso_distance(trace.iterates[0].x, lam)
    _expect(distance <= 1e-5, f"Lasso iterate is {distance:.3g} away from the solution segment")
    _expect(trace.outer_iters >= 3, f"expected at least 3 subproblems, got {trace.outer_iters}")
    _close(trace.iterates[1].x, (2 - 16 * lam / 3, 10 - 8 * lam / 3, 0, 0, 0), TOY_TOL, "x^2")
    _close(trace.iterates[2].x, (2, 10, 0, 0, 0), TOY_TOL, "x^3")
    return f"segment distance {distance:.1e}"


def check_nsp_exam31(options: VerifyOptions) -> str:
    instance, truth = exam31()
    A = instance.A
    for gamma in (0.3, 0.7, 0.9):
        verdict = nsp_witness_search(A, NspQuery(KIND_NSP, r=truth.r, gamma=gamma, tau=200.0), 200, seed=options.seed)
        _expect(verdict.violated, f"no robust-NSP witness for gamma={gamma}")
    rec = nsp_witness_search(A, NspQuery(KIND_REC, r=truth.r, c=2.0), 200, seed=options.seed)
    _expect(rec.violated and rec.chi_estimate == 0.0, "REC(2) violation not found")
    for lam in (0.01, 0.1):
        beta0 = beta0_exact_1d(instance.A, instance.b, lam)
        _expect(beta0.value is not None, f"beta_0 unavailable: {beta0.reason}")
        _expect(abs(beta0.value - (9 - 4 * lam)) <= 1e-8, f"beta_0({lam}) = {beta0.value!r}, expected {9 - 4 * lam}")
    sigma3 = diagnostics.sparse_sigma(A, 3)
    _expect(sigma3 > 0.25, f"sigma_A(3) = {sigma3:.4g} <= 0.25")
    return f"sigma_A(3) = {sigma3:.4f}"


# 5-6: kernel suites

def _random_penalty(rng: np.random.Generator, n: int) -> SeparablePenalty:
    kind = rng.integers(0, 3, size=n)
    weights = np.where(kind == 0, 0.0, np.where(kind == 1, 1.0, rng.uniform(0.1, 2.0, size=n)))
    tilt = rng.uniform(-0.5, 0.5, size=n) if rng.random() < 0.5 else np.zeros(n)
    box = np.where(rng.random(n) < 0.5, np.inf, rng.uniform(0.5, 5.0, size=n))
    return SeparablePenalty(weights=weights, tilt=tilt, box_radius=box, lam=float(rng.uniform(0.05, 1.0)))


def check_moreau_identity(options: VerifyOptions, queries: int = 10_000) -> str:
    rng = np.random.default_rng(options.seed)
    worst = 0.0
    for _ in range(queries):
        n = int(rng.integers(1, 7))
        penalty = _random_penalty(rng, n)
        u = rng.normal(scale=3.0, size=n)
        t = float(10 ** rng.uniform(-2, 2))
        rebuilt = prox.prox_primal(u, penalty, t) + t * prox.prox_conjugate(u / t, penalty, 1.0 / t)
        residual = float(np.max(np.abs(rebuilt - u))) / (1.0 + float(np.max(np.abs(u))))
        # NaN must not slip through max()
        worst = max(worst, residual) if math.isfinite(residual) else math.inf
    _expect(worst <= 1e-12, f"Moreau decomposition residual {worst:.3g} > 1e-12")
    return f"max residual {worst:.1e} over {queries} queries"


def check_prox_nonexpansive(options: VerifyOptions, pairs: int = 2000) -> str:
    rng = np.random.default_rng(options.seed + 1)
    for _ in range(pairs):
        n = int(rng.integers(1, 8))
        penalty = _random_penalty(rng, n)
        t = float(10 ** rng.uniform(-2, 2))
        u, w = rng.normal(scale=3.0, size=(2, n))
        gap = float(np.linalg.norm(u - w))
        for kernel in (prox.prox_primal, prox.prox_conjugate):
            moved = float(np.linalg.norm(kernel(u, penalty, t) - kernel(w, penalty, t)))
            _expect(moved <= gap * (1 + 1e-12) + 1e-15, f"{kernel.__name__} expanded a pair ({moved:.6g} > {gap:.6g})")
    return f"{pairs} pairs"


def _near_kink(u: np.ndarray, penalty: SeparablePenalty, t: float, margin: float) -> bool:
    shifted = np.abs(u + penalty.tilt)
    alpha = penalty.alpha
    edges = [alpha]
    finite = penalty.finite_box
    if np.any(finite):
        edges.append(np.where(finite, alpha + t * np.where(finite, penalty.box_radius, 0.0), np.inf))
    return any(bool(np.any(np.abs(shifted - edge) < margin)) for edge in edges)


def check_envelope_gradient(options: VerifyOptions, points: int = 500, h: float = 1e-6) -> str:
    rng = np.random.default_rng(options.seed + 2)
    worst = 0.0
    checked = 0
    while checked < points:
        n = int(rng.integers(1, 6))
        penalty = _random_penalty(rng, n)
        t = float(10 ** rng.uniform(-1, 1))
        u = rng.normal(scale=2.0, size=n)
        if _near_kink(u, penalty, t, 100 * h):
            continue
        exact = prox.envelope_gradient(u, penalty, t)
        numeric = np.array([
            (prox.moreau_envelope_conjugate(u + h * e, penalty, t) - prox.moreau_envelope_conjugate(u - h * e, penalty, t)) / (2 * h)
            for e in np.eye(n)
        ])
        worst = max(worst, float(np.linalg.norm(numeric - exact)) / max(1.0, float(np.linalg.norm(exact))))
        checked += 1
    _expect(worst <= 1e-6, f"envelope gradient relative error {worst:.3g} > 1e-6")
    return f"max relative error {worst:.1e}"


def _random_truncated_instance(rng: np.random.Generator, m: int, n: int, free_fraction: float = 0.25):
    A = rng.standard_normal((m, n))
    x_true = np.zeros(n)
    x_true[rng.choice(n, size=max(1, n // 10), replace=False)] = rng.normal(scale=3.0, size=max(1, n // 10))
    b = A @ x_true + 0.1 * rng.standard_normal(m)
    instance = ProblemInstance(A, b)
    free = rng.choice(n, size=int(min(free_fraction * m, n // 2)), replace=False)
    working_set = sorted(set(range(n)) - set(int(i) for i in free))
    lam = lambda_from_c(instance, float(rng.uniform(0.1, 0.5)))
    return instance, SeparablePenalty.truncated_l1(n, lam, working_set, mu=float(rng.uniform(5.0, 50.0)))


def _random_state(rng: np.random.Generator, m: int, n: int) -> ssnal.SsnalState:
    return ssnal.SsnalState(zeta=rng.normal(size=m), x=rng.normal(size=n), sigma=float(10 ** rng.uniform(-1, 1)))


def check_grad_phi(options: VerifyOptions, instances: int = 100, h: float = 1e-5) -> str:
    rng = np.random.default_rng(options.seed + 3)
    worst = 0.0
    checked = 0
    while checked < instances:
        m, n = int(rng.integers(3, 9)), int(rng.integers(4, 13))
        instance, penalty = _random_truncated_instance(rng, m, n)
        state = _random_state(rng, m, n)
        B = instance.A.T @ state.zeta + state.x / state.sigma
        if _near_kink(B, penalty, 1.0 / state.sigma, 1e-3):
            continue
        checked += 1
        exact = ssnal.grad_phi(state, instance, penalty)
        numeric = np.empty(m)
        for i in range(m):
            step = np.zeros(m)
            step[i] = h
            plus = ssnal.SsnalState(zeta=state.zeta + step, x=state.x, sigma=state.sigma)
            minus = ssnal.SsnalState(zeta=state.zeta - step, x=state.x, sigma=state.sigma)
            numeric[i] = (ssnal.phi_value(plus, instance, penalty) - ssnal.phi_value(minus, instance, penalty)) / (2 * h)
        worst = max(worst, float(np.linalg.norm(numeric - exact)) / max(1.0, float(np.linalg.norm(exact))))
    _expect(worst <= 1e-6, f"grad_phi relative error {worst:.3g} > 1e-6")
    return f"max relative error {worst:.1e}"


def check_newton_direction(options: VerifyOptions, instances: int = 100) -> str:
    rng = np.random.default_rng(options.seed + 4)
    caps = ssnal.SsnalCaps(max_cg=1000)
    worst = 0.0
    for _ in range(instances):
        m, n = int(rng.integers(2, 11)), int(rng.integers(3, 16))
        instance, penalty = _random_truncated_instance(rng, m, n)
        state = _random_state(rng, m, n)
        gradient = ssnal.grad_phi(state, instance, penalty)
        dense = np.linalg.solve(ssnal.newton_matrix(state, instance, penalty), -gradient)
        scale = max(1.0, float(np.linalg.norm(dense)))
        for method in ("direct", "cg"):
            step = ssnal.newton_step(state, instance, penalty, caps, gradient=gradient, cg_tol=1e-13, method=method)
            _expect(not step.degraded, f"{method} direction degraded")
            worst = max(worst, float(np.linalg.norm(step.direction - dense)) / scale)
    _expect(worst <= 1e-10, f"Newton direction deviates from the dense solve by {worst:.3g}")
    return f"max relative deviation {worst:.1e}"


def check_ssnal_convergence(options: VerifyOptions, instances: int = 50) -> str:
    rng = np.random.default_rng(options.seed + 5)
    tol = 1e-6
    for index in range(instances):
        m, n = int(rng.integers(20, 101)), int(rng.integers(50, 501))
        instance, penalty = _random_truncated_instance(rng, m, n)
        report = ssnal.solve_subproblem(instance, penalty, tol=tol)
        b_norm = float(np.linalg.norm(instance.b))
        _expect(report.converged, f"instance {index} ({m}x{n}) ended with status {report.status}")
        _expect(report.kkt_residual <= tol * b_norm, f"instance {index}: kkt residual {report.kkt_residual:.3g}")
        slack = 1e-6 * (1 + b_norm ** 2 / m)
        _expect(report.primal_objective >= report.dual_objective - slack,
                f"instance {index}: weak duality violated ({report.primal_objective!r} < {report.dual_objective!r})")
        zero = ssnal.primal_objective(np.zeros(n), instance, penalty)
        _expect(report.primal_objective <= zero + 1e-9, f"instance {index}: objective above the zero vector")
    return f"{instances} instances converged"


# 7: bound and oracle suite

def _random_bound_instance(rng: np.random.Generator):
    r = int(rng.integers(1, 7))
    m, n = int(rng.integers(3 * r + 5, 3 * r + 20)), int(rng.integers(r + 4, r + 9))
    A = rng.standard_normal((m, n))
    x_bar = np.zeros(n)
    support = rng.choice(n, size=r, replace=False)
    x_bar[support] = rng.choice([-1.0, 1.0], size=r) * rng.uniform(1.0, 5.0, size=r)
    noise = 0.1 * rng.standard_normal(m)
    return ProblemInstance(A, A @ x_bar + noise), GroundTruth(x_bar, noise)


def check_restricted_pinv(options: VerifyOptions, instances: int = 20) -> str:
    rng = np.random.default_rng(options.seed + 6)
    for index in range(instances):
        instance, truth = _random_bound_instance(rng)
        result = diagnostics.operator_norm_check(instance.A, truth.support)
        _expect(result["holds"], f"instance {index}: {result['max_value']:.6g} > {result['bound']:.6g}")
    return f"{instances} instances"


def check_oracle_properties(options: VerifyOptions, instances: int = 20) -> str:
    rng = np.random.default_rng(options.seed + 7)
    for index in range(instances):
        instance, truth = _random_bound_instance(rng)
        lam = lambda_from_c(instance, 1.0)
        sigma_r = diagnostics.sparse_sigma(instance.A, truth.r)
        kappa_value = diagnostics.kappa(instance.A, truth.support)
        result = diagnostics.oracle_checks(instance.A, instance.b, truth, lam, kappa_value, sigma_r)
        _expect(result["normal_residual"] <= 1e-9, f"instance {index}: normal residual {result['normal_residual']:.3g}")
        _expect(result["l1_bound_holds"], f"instance {index}: ||x_o||_1 exceeds 0.8 M_hat")
        _expect(result["distance_bound_holds"], f"instance {index}: oracle distance bound fails")
    return f"{instances} instances"


def check_capped_difference(options: VerifyOptions, triples: int = 100_000) -> str:
    rng = np.random.default_rng(options.seed + 8)
    M = rng.uniform(0.1, 10.0, size=triples)
    a = rng.uniform(-1.0, 1.0, size=triples) * M
    w = rng.normal(scale=5.0, size=triples)
    holds = diagnostics.capped_difference_holds(a, w, M)
    _expect(bool(np.all(holds)), f"{int(np.sum(~holds))} triples violate the capped-difference inequality")
    return f"{triples} triples"


# 8-9: synthetic recovery (slow)

RECOVERY_CASES = (("exam51", 400, 10.0), ("exam52", 600, 40.0))


def _recovery_runs(options: VerifyOptions) -> Dict[str, List[dict]]:
    runs: Dict[str, List[dict]] = {}
    for preset, m, c_lambda in RECOVERY_CASES:
        runs[preset] = []
        for seed in range(options.recovery_seeds):
            instance, truth = gen_synthetic(preset_spec(preset, m, seed))
            lam = lambda_from_c(instance, c_lambda)
            trace = iscra.run(instance, SolverOptions.from_config(lam))
            lasso_x = baselines.lasso(instance, lam)
            runs[preset].append({"instance": instance, "truth": truth, "lam": lam, "trace": trace,
                                 "lasso_relerr": relative_error(lasso_x, truth)})
    return runs


_recovery_cache: Dict[Tuple[int, int], Dict[str, List[dict]]] = {}


def _cached_recovery(options: VerifyOptions) -> Dict[str, List[dict]]:
    key = (options.seed, options.recovery_seeds)
    if key not in _recovery_cache:
        _recovery_cache[key] = _recovery_runs(options)
    return _recovery_cache[key]


def check_synthetic_recovery(options: VerifyOptions) -> str:
    if not options.full:
        raise CheckSkipped("slow check; run verify --full")
    summary = []
    for preset, runs in _cached_recovery(options).items():
        r = runs[0]["truth"].r
        cap = max(5, r + 1)
        for run in runs:
            _expect(run["trace"].outer_iters <= cap, f"{preset}: {run['trace'].outer_iters} outer iterations > {cap}")
        matches = sum(support_metrics(run["trace"].final_x, run["truth"]).top_r_match for run in runs)
        needed = math.ceil(0.7 * len(runs))
        _expect(matches >= needed, f"{preset}: top-r support matched in {matches}/{len(runs)} seeds")
        ours = float(np.mean([relative_error(run["trace"].final_x, run["truth"]) for run in runs]))
        lasso_mean = float(np.mean([run["lasso_relerr"] for run in runs]))
        _expect(ours <= lasso_mean, f"{preset}: mean relerr {ours:.4f} above Lasso's {lasso_mean:.4f}")
        summary.append(f"{preset}: {matches}/{len(runs)} supports, relerr {ours:.3f} vs lasso {lasso_mean:.3f}")
    return "; ".join(summary)


def check_theta_consistency(options: VerifyOptions) -> str:
    if not options.full:
        raise CheckSkipped("slow check; run verify --full")
    checked = 0
    for preset, runs in _cached_recovery(options).items():
        for run in runs:
            instance, truth = run["instance"], run["truth"]
            r = truth.r
            magnitudes = np.sort(np.abs(truth.x_bar))[::-1]
            noise_norm = float(np.linalg.norm(truth.noise_or_zero(instance.m)))
            try:
                bounds = diagnostics.theta_bounds(instance.A, noise_norm, run["lam"], 0.0, r,
                                                  float(magnitudes[r - 1]), float(np.sum(magnitudes)))
            except BudgetExceededError:
                continue
            theta_last = bounds.values[-1]
            if not (bounds.hypotheses_verified and theta_last > 0):
                continue
            radius = diagnostics.residual_radius(noise_norm, instance.m, run["lam"], 0.0, float(np.sum(magnitudes)))
            iterates = [rec.x for rec in run["trace"].iterates]
            for observed in diagnostics.observed_beta_values(iterates, instance.A, instance.b, radius, r):
                _expect(observed[-1] >= theta_last - 1e-9, f"{preset}: |x|_r = {observed[-1]:.6g} < theta = {theta_last:.6g}")
                checked += 1
    if checked == 0:
        raise CheckSkipped("no run had a certified positive theta bound within the enumeration budget")
    return f"{checked} iterates checked"


# 10: determinism and I/O

def check_determinism_io(options: VerifyOptions) -> str:
    plan = SweepPlan(preset="exam52", m=60, solvers=("lasso",), c_lambdas=(10.0,), seeds=(0, 1))
    with tempfile.TemporaryDirectory() as folder:
        paths = [write_metrics_csv(Path(folder) / f"sweep{k}.csv", run_sweep(plan, show_progress=False), timestamp=f"run {k}")
                 for k in (1, 2)]
        first, second = (path.read_text(encoding="utf-8").splitlines()[1:] for path in paths)
        rows = read_csv_rows(paths[0])
    _expect(first == second, "repeated seeded sweeps produced different CSV bodies")
    _expect(len(rows) == 3 and list(rows[0]) == METRICS_HEADER, f"sweep CSV read back as {len(rows)} rows")
    _expect([row["seed"] for row in rows] == ["0", "1", "mean"], "sweep CSV rows out of order")

    rng = np.random.default_rng(options.seed + 9)
    A = rng.normal(size=(15, 7)) * (rng.random((15, 7)) < 0.6)
    A[0] = rng.normal(size=7)
    instance = ProblemInstance(A, rng.normal(size=15), cleaned=True)
    with tempfile.TemporaryDirectory() as folder:
        path = write_libsvm(Path(folder) / "roundtrip.txt", instance)
        loaded, column_map = read_libsvm(path)
    _expect(np.array_equal(loaded.A, instance.A) and np.array_equal(loaded.b, instance.b), "LIBSVM round trip changed the data")
    _expect(column_map == tuple(range(1, 8)), f"unexpected column map {column_map}")

    for _ in range(10):
        d, p = int(rng.integers(1, 6)), int(rng.integers(1, 5))
        expanded = poly_expand(rng.normal(size=(4, d)), p)
        _expect(expanded.shape[1] == poly_column_count(d, p) == math.comb(d + p, p) - 1,
                f"poly_expand({d} features, order {p}) has {expanded.shape[1]} columns")
    return "CSV, LIBSVM and polynomial counts stable"


CheckFn = Callable[[VerifyOptions], str]

CHECKS: Tuple[Tuple[int, str, CheckFn], ...] = (
    (1, "toy-trajectory-exam41", check_toy_exam41),
    (2, "baseline-contrast-exam41", check_contrast_exam41),
    (3, "toy-trajectory-exam42", check_toy_exam42),
    (4, "nsp-diagnostics-exam31", check_nsp_exam31),
    (5, "moreau-identity", check_moreau_identity),
    (5, "prox-nonexpansive", check_prox_nonexpansive),
    (5, "envelope-gradient", check_envelope_gradient),
    (5, "grad-phi", check_grad_phi),
    (5, "newton-direction", check_newton_direction),
    (6, "ssnal-convergence", check_ssnal_convergence),
    (7, "restricted-pinv-bound", check_restricted_pinv),
    (7, "oracle-properties", check_oracle_properties),
    (7, "capped-difference", check_capped_difference),
    (8, "synthetic-recovery", check_synthetic_recovery),
    (9, "theta-consistency", check_theta_consistency),
    (10, "determinism-io", check_determinism_io),
)


def run_checks(options: Optional[VerifyOptions] = None, only: Optional[Sequence[str]] = None) -> List[CheckResult]:
    """
    Run the acceptance checks in order.

    Args:
        options: Toy parameters, seeds and the full flag
        only: Restrict to these check names

    Returns:
        List[CheckResult]: One result per check
    """
    options = options or VerifyOptions()
    results = []
    for number, name, check in CHECKS:
        if only and name not in only:
            continue
        started = time.perf_counter()
        try:
            status, detail = PASS, check(options)
        except CheckSkipped as e:
            status, detail = SKIP, str(e)
        except CheckFailed as e:
            status, detail = FAIL, str(e)
        except Exception as e:
            status, detail = FAIL, f"{type(e).__name__}: {e}"
        results.append(CheckResult(number, name, status, detail, time.perf_counter() - started))
    return results
