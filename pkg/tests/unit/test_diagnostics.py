"""
Unit tests for the theory constants and their bound checks.

exam41 reference values: kappa = 3, lambda floor 1/15 for gamma = 1/2,
oracle (0, 0, 2.05, 10.05).
"""

import math

import numpy as np
import pytest

from sparse_iscra.analysis.diagnostics import (
    VERDICT_INDETERMINATE, VERDICT_SUFFICIENT, VERDICT_VIOLATED, assumption_verdict,
    capped_difference_holds, diagnose, kappa, lambda_floor, m_cap, m_hat,
    observed_beta_values, operator_norm_check, oracle_checks, oracle_estimator,
    residual_radius, restricted_pinv_norm, sampled_sparse_sigma, sparse_sigma,
    spectral_norm, theta_bounds,
)
from sparse_iscra.utils.errors import BudgetExceededError, InvalidArgumentError, SingularSubmatrixError


class TestSparseSigma:
    def test_exam41_values(self, exam41_pair):
        instance, _ = exam41_pair
        assert sparse_sigma(instance.A, 1) == pytest.approx(1 / math.sqrt(3))
        assert sparse_sigma(instance.A, 4) == 0.0

    def test_exam31_order_three_is_well_conditioned(self, exam31_pair):
        instance, _ = exam31_pair
        assert sparse_sigma(instance.A, 3) > 0.25

    def test_budget_is_enforced(self, exam41_pair):
        instance, _ = exam41_pair
        with pytest.raises(BudgetExceededError) as info:
            sparse_sigma(instance.A, 2, budget=3)
        assert info.value.required == 6
        assert info.value.budget == 3

    def test_invalid_order(self, exam41_pair):
        instance, _ = exam41_pair
        with pytest.raises(InvalidArgumentError):
            sparse_sigma(instance.A, 0)

    def test_sampled_estimate_is_an_upper_bound(self, rng):
        A = rng.standard_normal((6, 9))
        exact = sparse_sigma(A, 3)
        assert sampled_sparse_sigma(A, 3, samples=50, seed=1) >= exact - 1e-12

    def test_spectral_norm(self, rng):
        A = rng.standard_normal((7, 5))
        assert spectral_norm(A) == pytest.approx(np.linalg.norm(A, 2), rel=1e-6)
        assert spectral_norm(np.zeros((2, 2))) == 0.0


class TestSupportConstants:
    def test_kappa_exam41(self, exam41_pair):
        instance, truth = exam41_pair
        assert kappa(instance.A, truth.support) == pytest.approx(3.0)

    def test_kappa_needs_injective_submatrices(self):
        A = np.array([[1.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
        with pytest.raises(SingularSubmatrixError):
            kappa(A, (0, 1))

    def test_kappa_budget(self, exam41_pair):
        instance, truth = exam41_pair
        with pytest.raises(BudgetExceededError):
            kappa(instance.A, truth.support, budget=2)

    def test_lambda_floor_exam41(self, exam41_pair):
        instance, truth = exam41_pair
        assert lambda_floor(instance.A, truth.support, truth.noise, 0.5) == pytest.approx(1 / 15)
        with pytest.raises(InvalidArgumentError):
            lambda_floor(instance.A, truth.support, truth.noise, 1.0)

    def test_oracle_exam41(self, exam41_pair):
        instance, truth = exam41_pair
        x_o, certificate = oracle_estimator(instance.A, instance.b, truth.support)
        assert np.allclose(x_o, [0.0, 0.0, 2.05, 10.05])
        assert np.max(np.abs(certificate)) <= 1e-12

    def test_m_hat_and_m_cap(self, exam41_pair):
        instance, truth = exam41_pair
        sigma_r = sparse_sigma(instance.A, 2)
        hat = m_hat(instance.A, instance.b, 0.1, 2, 3.0, sigma_r)
        b_norm = np.linalg.norm(instance.b)
        expected = 8 * math.sqrt(2) * b_norm / (2 * math.sqrt(3) * sigma_r) + 5 * b_norm ** 2 * 4 / (8 * 3 * 0.1)
        assert hat == pytest.approx(expected)
        assert m_cap(instance.A, truth.noise, 2, sigma_r, 10.0) > 10.0
        assert m_cap(instance.A, truth.noise, 2, 0.0, 10.0) == math.inf
        with pytest.raises(InvalidArgumentError):
            m_hat(instance.A, instance.b, 0.1, 2, 3.0, 0.0)

    def test_residual_radius(self):
        assert residual_radius(3.0, 2, 1.0, 0.0, 4.0) == pytest.approx(5.0)


class TestThetaBounds:
    def test_values_and_reused_sigmas(self, exam41_pair):
        instance, truth = exam41_pair
        bounds = theta_bounds(instance.A, float(np.linalg.norm(truth.noise)), 0.1, 0.0, 2, 2.0, 12.0)
        assert len(bounds.values) == 2
        assert set(bounds.sigma_values) == {2, 3}
        assert bounds.spectral_norm == pytest.approx(np.linalg.norm(instance.A, 2), rel=1e-6)

    def test_r_must_be_positive(self, exam41_pair):
        instance, _ = exam41_pair
        with pytest.raises(InvalidArgumentError):
            theta_bounds(instance.A, 0.0, 0.1, 0.0, 0, 1.0, 1.0)

    def test_assumption_verdicts(self):
        common = dict(mu=10.0, m_cap_value=5.0, lam=0.1, lambda_floor_value=0.05, varsigma0=0.0,
                      kappa_value=3.0, gamma=0.5, tau=1.0, rho=0.5, m_hat_value=1.0, r=2)
        assert assumption_verdict(0.0, theta_last=None, **common) == VERDICT_VIOLATED
        assert assumption_verdict(0.3, theta_last=1e6, **common) == VERDICT_SUFFICIENT
        assert assumption_verdict(0.3, theta_last=None, **common) == VERDICT_INDETERMINATE
        assert assumption_verdict(0.3, theta_last=None, **{**common, "mu": 1.0}) == VERDICT_VIOLATED


class TestBoundChecks:
    def test_operator_norm_bound(self, exam41_pair):
        instance, truth = exam41_pair
        result = operator_norm_check(instance.A, truth.support)
        assert result["holds"]
        assert restricted_pinv_norm(instance.A, [2, 3]) == pytest.approx(math.sqrt(3))

    def test_pinv_of_singular_columns(self):
        with pytest.raises(SingularSubmatrixError):
            restricted_pinv_norm(np.array([[1.0, 2.0], [1.0, 2.0]]), [0, 1])

    def test_oracle_properties_exam41(self, exam41_pair):
        instance, truth = exam41_pair
        result = oracle_checks(instance.A, instance.b, truth, 0.1, 3.0, sparse_sigma(instance.A, 2))
        assert result["normal_residual"] <= 1e-12
        assert result["distance"] == pytest.approx(0.1)
        assert result["distance_bound_holds"]
        assert result["l1_bound_holds"]

    def test_capped_difference(self, rng):
        a = rng.uniform(-3, 3, size=10_000)
        w = rng.normal(scale=3.0, size=10_000)
        M = rng.uniform(0.1, 3.0, size=10_000)
        assert np.all(capped_difference_holds(a, w, M))
        assert bool(capped_difference_holds(5.0, -10.0, 1.0))

    def test_observed_beta_values(self, exam41_pair):
        instance, truth = exam41_pair
        inside = truth.x_bar
        outside = np.zeros(4)
        observed = observed_beta_values([inside, outside], instance.A, instance.b, radius=1.0, r=2)
        assert observed == [[10.0, 2.0]]


class TestDiagnose:
    def test_exam41_report(self, exam41_pair):
        instance, truth = exam41_pair
        report = diagnose(instance, truth, 0.1)
        assert report.kappa == pytest.approx(3.0)
        assert report.lambda_floor == pytest.approx(1 / 15)
        assert np.allclose(report.oracle, [0.0, 0.0, 2.05, 10.05])
        assert report.beta0_exact is not None
        assert report.assumption in (VERDICT_SUFFICIENT, VERDICT_INDETERMINATE, VERDICT_VIOLATED)
        data = report.to_dict()
        assert {"sigma_a", "kappa", "m_hat", "theta", "nsp_verdicts", "notes"} <= set(data)

    def test_without_ground_truth(self, exam41_pair):
        instance, _ = exam41_pair
        report = diagnose(instance, None, 0.1)
        assert report.kappa is None
        assert report.notes["kappa"] == "ground truth unavailable"
        assert report.spectral_norm > 0

    def test_budget_overrun_becomes_a_note(self, exam41_pair):
        instance, truth = exam41_pair
        report = diagnose(instance, truth, 0.1, config={"analysis": {"sigma_budget": 1}})
        assert "sigma_a" in report.notes
        assert report.kappa == pytest.approx(3.0)
