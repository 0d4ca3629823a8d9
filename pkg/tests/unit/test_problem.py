"""
Unit tests for the problem model: records, penalties, options and measures.
"""

import numpy as np
import pytest

from sparse_iscra.models.problem import (
    STATUS_MAX_ITER, GroundTruth, IterationRecord, ProblemInstance, SeparablePenalty,
    SolveTrace, SolverOptions, lambda_from_c, loss, nnz_count, relative_error,
    support_metrics, top_r_support, validate_trace,
)
from sparse_iscra.utils.errors import InvalidArgumentError


class TestProblemInstance:
    def test_shapes_and_read_only_arrays(self, exam41_pair):
        instance, _ = exam41_pair
        assert (instance.m, instance.n) == (3, 4)
        assert not instance.A.flags.writeable
        assert not instance.b.flags.writeable
        with pytest.raises(ValueError):
            instance.A[0, 0] = 5.0

    def test_rejects_mismatched_response(self):
        with pytest.raises(InvalidArgumentError):
            ProblemInstance(np.ones((3, 2)), np.ones(4))

    def test_rejects_non_finite_values(self):
        A = np.ones((2, 2))
        A[1, 1] = np.nan
        with pytest.raises(InvalidArgumentError):
            ProblemInstance(A, np.ones(2))

    def test_cleaned_flag_forbids_zero_columns(self):
        A = np.array([[1.0, 0.0], [2.0, 0.0]])
        ProblemInstance(A, np.ones(2))
        with pytest.raises(InvalidArgumentError):
            ProblemInstance(A, np.ones(2), cleaned=True)

    def test_errors_are_value_errors(self):
        with pytest.raises(ValueError):
            ProblemInstance(np.ones(3), np.ones(3))


class TestGroundTruth:
    def test_support_and_order(self, exam31_pair):
        _, truth = exam31_pair
        assert truth.support == (0, 1)
        assert truth.r == 2

    def test_missing_noise_reads_as_zero(self):
        truth = GroundTruth(np.array([1.0, 0.0]))
        assert np.array_equal(truth.noise_or_zero(3), np.zeros(3))


class TestSeparablePenalty:
    def test_truncated_l1_layout(self):
        penalty = SeparablePenalty.truncated_l1(4, lam=0.1, working_set=[0, 2], mu=7.0)
        assert np.array_equal(penalty.weights, [1.0, 0.0, 1.0, 0.0])
        assert np.array_equal(penalty.box_radius, [np.inf, 7.0, np.inf, 7.0])
        assert penalty.working_set == (0, 2)
        assert penalty.is_truncated_l1

    def test_lasso_has_no_box(self):
        penalty = SeparablePenalty.lasso(3, 0.5)
        assert np.all(np.isinf(penalty.box_radius))
        assert np.allclose(penalty.alpha, 0.5)

    def test_value_is_infinite_outside_the_box(self):
        penalty = SeparablePenalty.truncated_l1(2, lam=0.1, working_set=[0], mu=1.0)
        assert penalty.value(np.array([2.0, 0.5])) == pytest.approx(0.2)
        assert penalty.value(np.array([0.0, 1.5])) == float("inf")

    def test_tilt_enters_linearly(self):
        penalty = SeparablePenalty.weighted_l1([1.0, 1.0], lam=1.0, tilt=[0.5, 0.0])
        assert penalty.value(np.array([2.0, -1.0])) == pytest.approx(3.0 - 1.0)

    @pytest.mark.parametrize("kwargs", [
        {"weights": [-1.0], "tilt": [0.0], "box_radius": [np.inf], "lam": 1.0},
        {"weights": [1.0], "tilt": [0.0], "box_radius": [0.0], "lam": 1.0},
        {"weights": [1.0], "tilt": [0.0], "box_radius": [np.inf], "lam": 0.0},
        {"weights": [1.0], "tilt": [np.inf], "box_radius": [np.inf], "lam": 1.0},
    ])
    def test_invalid_penalties(self, kwargs):
        with pytest.raises(InvalidArgumentError):
            SeparablePenalty(**kwargs)


class TestSolverOptions:
    def test_defaults_come_from_config(self):
        options = SolverOptions.from_config(lam=0.1)
        assert options.rho == pytest.approx(0.2)
        assert options.mu == pytest.approx(1e3)
        assert options.termination == "both"

    def test_explicit_overrides_win_and_none_is_ignored(self):
        options = SolverOptions.from_config(lam=0.1, rho=0.8, mu=None)
        assert options.rho == pytest.approx(0.8)
        assert options.mu == pytest.approx(1e3)

    @pytest.mark.parametrize("kwargs", [
        {"lam": 0.0},
        {"lam": 0.1, "rho": 0.0},
        {"lam": 0.1, "rho": 1.5},
        {"lam": 0.1, "mu": -1.0},
        {"lam": 0.1, "epsilon": -0.1},
        {"lam": 0.1, "max_outer": 0},
        {"lam": 0.1, "termination": "sometimes"},
        {"lam": 0.1, "varsigma_schedule": (1.0,)},
        {"lam": 0.1, "varsigma_schedule": (0.1, 0.2)},
    ])
    def test_invalid_options(self, kwargs):
        with pytest.raises(InvalidArgumentError):
            SolverOptions(**kwargs)

    def test_schedule_reuses_its_last_entry(self):
        options = SolverOptions(lam=0.1, varsigma_schedule=(0.5, 0.1))
        assert options.varsigma(1) == 0.5
        assert options.varsigma(2) == 0.1
        assert options.varsigma(9) == 0.1
        assert SolverOptions(lam=0.1).varsigma(1) is None


class TestMeasures:
    def test_loss_at_truth_of_exam41(self, exam41_pair):
        instance, truth = exam41_pair
        assert loss(instance, truth.x_bar) == pytest.approx(0.00125)

    def test_loss_checks_length(self, exam41_pair):
        instance, _ = exam41_pair
        with pytest.raises(InvalidArgumentError):
            loss(instance, np.zeros(3))

    def test_relative_error(self):
        truth = GroundTruth(np.array([3.0, 4.0]))
        assert relative_error(np.array([3.0, 0.0]), truth) == pytest.approx(0.8)
        with pytest.raises(InvalidArgumentError):
            relative_error(np.zeros(2), GroundTruth(np.zeros(2)))

    def test_lambda_from_c(self, exam41_pair):
        instance, _ = exam41_pair
        # ||A^T b||_inf = 22.2 for e = 0.05
        assert lambda_from_c(instance, 3.0) == pytest.approx(22.2)

    def test_top_r_support_breaks_ties_by_index(self):
        assert top_r_support(np.array([1.0, -1.0, 0.5]), 1) == (0,)
        assert top_r_support(np.array([0.1, -3.0, 2.0]), 2) == (1, 2)
        assert top_r_support(np.array([1.0]), 0) == ()

    def test_nnz_threshold_is_relative(self):
        assert nnz_count(np.array([1e3, 1e-3, 0.0])) == 2
        assert nnz_count(np.array([1e6, 1e-3, 0.0])) == 1
        assert nnz_count(np.array([1.0, 1e-9])) == 1

    def test_support_metrics(self, exam41_pair):
        _, truth = exam41_pair
        exact = support_metrics(np.array([0.0, 0.0, 2.0, 9.9]), truth)
        assert exact.top_r_match and exact.exact_support_match and exact.nnz == 2
        spread = support_metrics(np.array([1e-3, 0.0, 2.0, 10.0]), truth)
        assert spread.top_r_match
        assert not spread.exact_support_match
        assert spread.nnz == 3


def _record(k, selected, working_set):
    return IterationRecord(k=k, x=np.zeros(4), selected=selected, working_set=working_set, inexactness=0.0)


class TestTraces:
    def test_valid_nested_trace(self):
        trace = SolveTrace("iscra", 0.1, [
            _record(1, (3,), (0, 1, 2)),
            _record(2, (2,), (0, 1)),
            _record(3, (), (0, 1)),
        ])
        assert validate_trace(trace, 4) == []
        assert trace.last_working_set == (0, 1)

    def test_violations_are_reported(self):
        trace = SolveTrace("iscra", 0.1, [
            _record(1, (), (0, 1, 2, 3)),
            _record(2, (3,), (0, 1, 2)),
            _record(3, (3,), (0, 1)),
        ])
        problems = validate_trace(trace, 4)
        assert any("empty I^k" in p for p in problems)
        assert any("not contained" in p for p in problems)
        assert any("T^k != T^(k-1)" in p for p in problems)

    def test_summary_reports_one_based_selections(self):
        trace = SolveTrace("iscra", 0.1, [_record(1, (3,), (0, 1, 2)), _record(2, (), (0, 1, 2))],
                           final_x=np.zeros(4), status=STATUS_MAX_ITER)
        summary = trace.summary()
        assert summary["outer_iters"] == 2
        assert summary["iterations"][0]["selected"] == [4]
        assert summary["iterations"][1]["working_set_size"] == 3
