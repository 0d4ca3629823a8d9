"""
Unit tests for the sequential truncated-l1 driver.

The toy trajectories are known in closed form:
    exam41 (e = 0.05, lam = 0.1, rho = 0.8):
        x^1 = (2.05, 1.7, 0, 5.65), I^1 = {4}
        x^2 = (0.05, 0, 1.7, 9.95), I^2 = {3}
        x^3 = (0, 0, 2.05, 10.05)
    exam42 (lam = 0.1, rho = 0.2):
        I^1 = {2}, x^2 = (2 - 16 lam/3, 10 - 8 lam/3, 0, 0, 0), x^3 = (2, 10, 0, 0, 0)
(1-based coordinates in this comment; the code is 0-based.)
"""

import numpy as np
import pytest

from sparse_iscra.data.toy_instances import exam42
from sparse_iscra.models.problem import (
    STATUS_EPSILON, STATUS_MAX_ITER, SolverOptions, validate_trace,
)
from sparse_iscra.solver import iscra
from sparse_iscra.solver.iscra import postprocess, relative_change, run, select_indices
from sparse_iscra.utils.errors import InnerSolverError, InvalidArgumentError
from tests.mocks import FailingSubproblemSolver

EXACT = 1e-10


class TestSelection:
    def test_ratio_rule(self):
        x = np.array([5.0, 1.0, 4.5, 0.0])
        assert select_indices(x, range(4), 0.8) == (0, 2)
        assert select_indices(x, range(4), 1.0) == (0,)
        assert select_indices(x, [1, 3], 0.5) == (1,)

    def test_all_zero_working_set_selects_nothing(self):
        assert select_indices(np.zeros(3), range(3), 0.5) == ()

    def test_invalid_arguments(self):
        with pytest.raises(InvalidArgumentError):
            select_indices(np.ones(2), [], 0.5)
        with pytest.raises(InvalidArgumentError):
            select_indices(np.ones(2), [0], 0.0)

    def test_relative_change(self):
        assert relative_change(np.array([1.0, 1.0]), np.array([1.0, 0.0])) == pytest.approx(0.5)
        assert relative_change(np.zeros(2), np.zeros(2)) == 0.0
        assert relative_change(np.zeros(2), np.ones(2)) == float("inf")


class TestToyTrajectories:
    def test_exam41_reaches_the_oracle(self, exam41_pair):
        instance, _ = exam41_pair
        options = SolverOptions(lam=0.1, rho=0.8, inner_tolerance=EXACT, termination="theory")
        trace = run(instance, options)
        assert trace.status == STATUS_EPSILON
        assert trace.outer_iters >= 3
        assert np.allclose(trace.iterates[0].x, [2.05, 1.7, 0.0, 5.65], atol=1e-6)
        assert trace.iterates[0].selected == (3,)
        assert np.allclose(trace.iterates[1].x, [0.05, 0.0, 1.7, 9.95], atol=1e-6)
        assert trace.iterates[1].selected == (2,)
        assert np.allclose(trace.final_x, [0.0, 0.0, 2.05, 10.05], atol=1e-6)
        assert trace.iterates[-1].selected == ()
        assert validate_trace(trace, instance.n) == []

    def test_exam42_recovers_the_truth(self):
        instance, truth = exam42()
        lam = 0.1
        trace = run(instance, SolverOptions(lam=lam, rho=0.2, inner_tolerance=EXACT, termination="theory"))
        assert trace.iterates[0].selected == (1,)
        assert np.allclose(trace.iterates[1].x, [2 - 16 * lam / 3, 10 - 8 * lam / 3, 0, 0, 0], atol=1e-6)
        assert np.allclose(trace.final_x, truth.x_bar, atol=1e-6)
        assert validate_trace(trace, instance.n) == []

    def test_postprocess_is_least_squares_on_identified_coordinates(self, exam41_pair):
        instance, _ = exam41_pair
        trace = run(instance, SolverOptions(lam=0.1, rho=0.8, inner_tolerance=EXACT))
        assert trace.last_working_set == (0, 1)
        assert np.allclose(postprocess(instance, trace), [0.0, 0.0, 2.05, 10.05], atol=1e-9)


class TestTermination:
    def test_outer_cap(self, exam41_pair):
        instance, _ = exam41_pair
        trace = run(instance, SolverOptions(lam=0.1, rho=0.8, max_outer=1))
        assert trace.status == STATUS_MAX_ITER
        assert trace.outer_iters == 1
        assert trace.iterates[0].selected == ()

    def test_epsilon_stops_early(self, exam41_pair):
        instance, _ = exam41_pair
        # every |x_i| on T^1 is below 20 after the first solve
        trace = run(instance, SolverOptions(lam=0.1, rho=0.8, epsilon=20.0, termination="theory"))
        assert trace.status == STATUS_EPSILON
        assert trace.outer_iters == 1

    def test_selection_ratio_one_on_small_instance(self, small_instance):
        instance, _ = small_instance
        trace = run(instance, SolverOptions(lam=0.5, rho=1.0, max_outer=10))
        assert validate_trace(trace, instance.n) == []
        assert all(len(rec.selected) <= 1 for rec in trace.iterates)

    def test_schedule_is_reported(self, exam41_pair):
        instance, _ = exam41_pair
        options = SolverOptions(lam=0.1, rho=0.8, varsigma_schedule=(0.5, 0.1, 0.01))
        trace = run(instance, options)
        assert all(rec.schedule_met is True for rec in trace.iterates)
        assert all(rec.inexactness <= 0.5 for rec in trace.iterates)

    def test_verbose_prints_one_line_per_iteration(self, exam41_pair, capsys):
        instance, _ = exam41_pair
        trace = run(instance, SolverOptions(lam=0.1, rho=0.8), verbose=True)
        output = capsys.readouterr().out
        assert output.count("iscra k=") == trace.outer_iters


class TestInnerFailures:
    def test_partial_trace_is_attached(self, exam41_pair, mocker):
        instance, _ = exam41_pair
        failing = FailingSubproblemSolver(fail_on_call=2)
        mocker.patch.object(iscra, "solve_subproblem", new=failing)
        with pytest.raises(InnerSolverError) as info:
            run(instance, SolverOptions(lam=0.1, rho=0.8, inner_tolerance=EXACT))
        partial = info.value.partial_trace
        assert partial.outer_iters == 1
        assert partial.iterates[0].selected == (3,)
        assert np.allclose(partial.final_x, [2.05, 1.7, 0.0, 5.65], atol=1e-6)
        assert failing.get_stats()["call_count"] == 2

    def test_linear_algebra_errors_are_wrapped(self, exam41_pair, mocker):
        instance, _ = exam41_pair
        mocker.patch.object(iscra, "solve_subproblem", new=FailingSubproblemSolver(1, "linalg"))
        with pytest.raises(InnerSolverError) as info:
            run(instance, SolverOptions(lam=0.1))
        assert info.value.partial_trace.outer_iters == 0
        assert info.value.partial_trace.final_x is None
