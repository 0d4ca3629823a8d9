"""
Unit tests for the comparison solvers (Lasso, LLA, MSCR, DCA).
"""

import math

import numpy as np
import pytest

from sparse_iscra.models.problem import STATUS_MAX_ITER
from sparse_iscra.solver.baselines import (
    BaselineOptions, dca_surrogate, dca_trl1, lasso, lasso_trace, lla, mcp_penalty, mcp_weight,
    mscr_cl1, penalized_objective, scad_penalty, scad_weight, transformed_l1,
)
from sparse_iscra.utils.errors import InvalidArgumentError

# where LLA-SCAD and MSCR-cL1 settle on exam41 (e = 0.05, lam = 0.1)
EXAM41_STALL = np.array([2.05, 2.0, 0.0, 5.95])


@pytest.fixture
def exact_options():
    return BaselineOptions(lam=0.1, inner_tolerance=1e-10, rel_change_tol=1e-9)


class TestPenalties:
    def test_scad_weight(self):
        assert scad_weight(0.05, 0.1) == 1.0
        assert scad_weight(0.2, 0.1, 3.7) == pytest.approx(0.17 / 0.27)
        assert scad_weight(0.5, 0.1) == 0.0
        assert np.allclose(scad_weight(np.array([-0.05, 1.0]), 0.1), [1.0, 0.0])

    def test_mcp_weight(self):
        assert mcp_weight(0.15, 0.1, 3.0) == pytest.approx(0.5)
        assert mcp_weight(1.0, 0.1, 3.0) == 0.0

    def test_scad_is_continuous_at_the_knots(self):
        lam, a = 0.1, 3.7
        for knot in (lam, a * lam):
            left, right = scad_penalty(np.array([knot - 1e-9, knot + 1e-9]), lam, a)
            assert left == pytest.approx(right, abs=1e-8)
        assert float(scad_penalty(10.0, lam, a)) == pytest.approx(lam ** 2 * (a + 1) / 2)

    def test_mcp_is_flat_beyond_a_lam(self):
        assert float(mcp_penalty(5.0, 0.1, 3.0)) == pytest.approx(0.015)

    def test_transformed_l1(self):
        assert float(transformed_l1(1.0, 1.0)) == pytest.approx(1.0)
        assert float(transformed_l1(0.0, 1.0)) == 0.0

    def test_dca_surrogate_majorizes(self, rng):
        lam, a = 0.3, 1.0
        for _ in range(100):
            x, y = rng.normal(scale=2.0, size=(2, 5))
            bound = lam * float(np.sum(transformed_l1(y, a)))
            assert dca_surrogate(y, x, lam, a) >= bound - 1e-12
            assert dca_surrogate(x, x, lam, a) == pytest.approx(lam * float(np.sum(transformed_l1(x, a))))

    def test_unknown_objective_kind(self, exam41_pair, exact_options):
        instance, _ = exam41_pair
        with pytest.raises(InvalidArgumentError):
            penalized_objective(instance, np.zeros(4), "l0", exact_options)


class TestOptions:
    @pytest.mark.parametrize("kwargs", [
        {"lam": 0.0},
        {"lam": 0.1, "scad_a": 2.0},
        {"lam": 0.1, "mcp_a": 1.0},
        {"lam": 0.1, "cap_epsilon": 0.0},
        {"lam": 0.1, "x0_policy": "custom"},
        {"lam": 0.1, "x0_policy": "random"},
        {"lam": 0.1, "max_outer": 0},
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(InvalidArgumentError):
            BaselineOptions(**kwargs)

    def test_from_config_and_default_cap(self, exam41_pair):
        instance, _ = exam41_pair
        options = BaselineOptions.from_config(0.1, scad_a=4.0)
        assert options.scad_a == 4.0
        assert options.epsilon_for(instance) == pytest.approx(0.5 * math.sqrt(math.log(4) / 3))
        assert BaselineOptions(lam=0.1, cap_epsilon=0.2).epsilon_for(instance) == 0.2


class TestSolvers:
    def test_lasso_trace_is_a_single_record(self, exam41_pair, exact_options):
        instance, _ = exam41_pair
        trace = lasso_trace(instance, exact_options)
        assert trace.status == STATUS_MAX_ITER
        assert trace.outer_iters == 1
        assert trace.iterates[0].selected == ()
        assert np.allclose(trace.final_x, lasso(instance, 0.1, tol=1e-10), atol=1e-7)

    def test_lasso_rejects_bad_lambda(self, exam41_pair):
        instance, _ = exam41_pair
        with pytest.raises(InvalidArgumentError):
            lasso(instance, -1.0)

    def test_lla_scad_stalls_on_exam41(self, exam41_pair, exact_options):
        instance, _ = exam41_pair
        trace = lla(instance, exact_options, "scad")
        assert trace.solver == "lla-scad"
        assert np.allclose(trace.final_x, EXAM41_STALL, atol=1e-6)
        assert all(rec.selected == () for rec in trace.iterates)

    def test_mscr_stalls_on_exam41(self, exam41_pair, exact_options):
        instance, _ = exam41_pair
        trace = mscr_cl1(instance, exact_options)
        assert np.allclose(trace.final_x, EXAM41_STALL, atol=1e-6)
        # only the third coordinate stays below the cap threshold
        assert trace.iterates[-1].working_set == (2,)

    def test_lla_mcp_runs(self, exam41_pair, exact_options):
        instance, _ = exam41_pair
        trace = lla(instance, exact_options, "mcp")
        assert trace.solver == "lla-mcp"
        assert trace.final_x.shape == (4,)
        with pytest.raises(InvalidArgumentError):
            lla(instance, exact_options, "lasso")

    def test_dca_decreases_its_objective(self, small_instance):
        instance, _ = small_instance
        options = BaselineOptions(lam=0.5, inner_tolerance=1e-10, rel_change_tol=1e-8, max_outer=20)
        trace = dca_trl1(instance, options)
        values = [penalized_objective(instance, rec.x, "trl1", options) for rec in trace.iterates]
        assert all(later <= earlier + 1e-7 for earlier, later in zip(values, values[1:]))

    def test_zero_start_makes_the_first_lla_step_a_lasso(self, exam41_pair):
        instance, _ = exam41_pair
        options = BaselineOptions(lam=0.1, inner_tolerance=1e-10, x0_policy="zero", max_outer=1)
        trace = lla(instance, options, "scad")
        assert np.allclose(trace.iterates[0].x, lasso(instance, 0.1, tol=1e-10), atol=1e-6)
        assert trace.status == STATUS_MAX_ITER

    def test_custom_start_needs_the_right_length(self, exam41_pair):
        instance, _ = exam41_pair
        options = BaselineOptions(lam=0.1, x0_policy="custom", x0=np.zeros(3))
        with pytest.raises(InvalidArgumentError):
            mscr_cl1(instance, options)
