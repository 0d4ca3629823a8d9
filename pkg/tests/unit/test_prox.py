"""
Unit tests for the separable proximal kernels.
"""

import numpy as np
import pytest

from sparse_iscra.models.problem import SeparablePenalty
from sparse_iscra.solver.prox import (
    ProxQuery, conjugate_value, envelope_gradient, jacobian_diag, moreau_envelope_conjugate,
    prox_conjugate, prox_jacobian_diag, prox_primal, soft_threshold,
)
from sparse_iscra.utils.errors import InvalidArgumentError, UnsupportedPenaltyError


def _mixed_penalty():
    """Two penalized coordinates (lam 0.5) and one boxed free coordinate (mu 2)."""
    return SeparablePenalty.truncated_l1(3, lam=0.5, working_set=[0, 1], mu=2.0)


class TestPrimal:
    def test_soft_threshold(self):
        assert np.allclose(soft_threshold(np.array([3.0, -0.5, -2.0]), 1.0), [2.0, 0.0, -1.0])

    def test_lasso_prox_is_soft_thresholding(self):
        penalty = SeparablePenalty.lasso(3, 0.3)
        assert np.allclose(prox_primal(np.array([1.0, -0.2, 0.0]), penalty), [0.7, 0.0, 0.0])

    def test_box_clips_free_coordinates(self):
        penalty = SeparablePenalty.truncated_l1(2, lam=0.1, working_set=[0], mu=1.0)
        assert np.allclose(prox_primal(np.array([5.0, 5.0]), penalty), [4.9, 1.0])
        assert np.allclose(prox_primal(np.array([-5.0, -5.0]), penalty, step=10.0), [-4.0, -1.0])

    def test_exact_zeros(self):
        penalty = SeparablePenalty.lasso(2, 1.0)
        assert np.array_equal(prox_primal(np.array([0.5, -0.999]), penalty), [0.0, 0.0])

    def test_step_must_be_positive(self):
        with pytest.raises(InvalidArgumentError):
            prox_primal(np.zeros(1), SeparablePenalty.lasso(1, 1.0), step=0.0)


class TestConjugate:
    def test_unit_weights_project_onto_the_interval(self):
        penalty = SeparablePenalty.lasso(3, 0.5)
        assert np.allclose(prox_conjugate(np.array([2.0, -0.1, -3.0]), penalty), [0.5, -0.1, -0.5])

    def test_zero_weight_box_gives_soft_thresholding(self):
        penalty = SeparablePenalty.truncated_l1(2, lam=0.1, working_set=[], mu=2.0)
        assert np.allclose(prox_conjugate(np.array([3.0, -1.0]), penalty, step=0.5), [2.0, 0.0])

    def test_moreau_decomposition(self, rng):
        for _ in range(200):
            n = int(rng.integers(1, 6))
            weights = rng.choice([0.0, 1.0, 0.7], size=n)
            penalty = SeparablePenalty(
                weights=weights,
                tilt=rng.normal(scale=0.1, size=n) * (weights > 0),
                box_radius=np.where(rng.random(n) < 0.5, np.inf, rng.uniform(0.5, 5.0, size=n)),
                lam=float(rng.uniform(0.1, 2.0)),
            )
            u = rng.normal(scale=3.0, size=n)
            t = float(10 ** rng.uniform(-1, 1))
            rebuilt = prox_primal(u, penalty, t) + t * prox_conjugate(u / t, penalty, 1.0 / t)
            assert np.allclose(rebuilt, u, atol=1e-12 * (1 + np.max(np.abs(u))))

    def test_both_kernels_are_nonexpansive(self, rng):
        penalty = _mixed_penalty()
        for _ in range(200):
            u, w = rng.normal(scale=3.0, size=(2, 3))
            gap = np.linalg.norm(u - w)
            for kernel in (prox_primal, prox_conjugate):
                assert np.linalg.norm(kernel(u, penalty, 0.7) - kernel(w, penalty, 0.7)) <= gap * (1 + 1e-12)

    def test_conjugate_value(self):
        lasso = SeparablePenalty.lasso(2, 1.0)
        assert conjugate_value(np.array([0.5, -1.0]), lasso) == 0.0
        assert conjugate_value(np.array([1.5, 0.0]), lasso) == float("inf")
        boxed = SeparablePenalty.truncated_l1(1, lam=0.1, working_set=[], mu=2.0)
        assert conjugate_value(np.array([3.0]), boxed) == pytest.approx(6.0)


class TestEnvelope:
    def test_envelope_value(self):
        # p = (0.2, 0.5, 1.0): 2*|1.0| + (0.8^2 + 1.0^2) / (2*0.5)
        value = moreau_envelope_conjugate(np.array([0.2, 1.3, 2.0]), _mixed_penalty(), step=0.5)
        assert value == pytest.approx(3.64)

    def test_gradient_matches_finite_differences(self):
        penalty = _mixed_penalty()
        u = np.array([0.2, 1.3, 2.0])
        h = 1e-6
        numeric = np.array([
            (moreau_envelope_conjugate(u + h * e, penalty, 0.5) - moreau_envelope_conjugate(u - h * e, penalty, 0.5)) / (2 * h)
            for e in np.eye(3)
        ])
        analytic = envelope_gradient(u, penalty, 0.5)
        assert np.allclose(analytic, [0.0, 1.6, 2.0])
        assert np.allclose(numeric, analytic, atol=1e-6)


class TestJacobian:
    def test_lasso_diagonal(self):
        penalty = SeparablePenalty.lasso(2, 0.5)
        assert np.array_equal(prox_jacobian_diag(np.array([0.2, 1.0]), penalty), [1.0, 0.0])

    def test_boxed_free_diagonal(self):
        penalty = SeparablePenalty.truncated_l1(2, lam=0.1, working_set=[], mu=1.0)
        assert np.array_equal(prox_jacobian_diag(np.array([2.0, 0.5]), penalty), [1.0, 0.0])

    def test_non_binary_weights_are_rejected(self):
        penalty = SeparablePenalty.weighted_l1([0.5, 1.0], lam=1.0)
        with pytest.raises(UnsupportedPenaltyError):
            prox_jacobian_diag(np.zeros(2), penalty)
        assert np.array_equal(jacobian_diag(np.array([0.1, 2.0]), penalty), [1.0, 0.0])


class TestProxQuery:
    def test_bundles_the_four_kernels(self):
        query = ProxQuery(np.array([0.2, 1.3, 2.0]), _mixed_penalty(), 0.5)
        assert np.allclose(query.conjugate(), [0.2, 0.5, 1.0])
        assert query.envelope() == pytest.approx(3.64)
        assert np.array_equal(query.jacobian_diag(), [1.0, 0.0, 1.0])
        assert query.primal().shape == (3,)

    def test_rejects_non_positive_step(self):
        with pytest.raises(InvalidArgumentError):
            ProxQuery(np.zeros(2), SeparablePenalty.lasso(2, 1.0), step=-1.0)
