"""
Integration tests for the acceptance checks behind `verify`.

Fault injection: the proximal kernel is swapped for CorruptedProx, whose
output is shifted by a tiny offset. The Moreau check must catch it, both
through run_checks() and through the CLI exit code.
"""

import pytest

from sparse_iscra.core import run_tool
from sparse_iscra.experiments import acceptance
from sparse_iscra.experiments.acceptance import (
    CHECKS, FAIL, PASS, SKIP, VerifyOptions, check_moreau_identity, exam41_band, run_checks,
)
from tests.mocks import CorruptedProx

PROX_PRIMAL = "sparse_iscra.solver.prox.prox_primal"

TOY_CHECKS = ["toy-trajectory-exam41", "baseline-contrast-exam41", "toy-trajectory-exam42", "nsp-diagnostics-exam31"]
BOUND_CHECKS = ["restricted-pinv-bound", "oracle-properties", "capped-difference"]


class TestCheckRegistry:
    def test_names_are_unique(self):
        names = [name for _, name, _ in CHECKS]
        assert len(names) == len(set(names)) == 16

    def test_admissible_band(self):
        low, high = exam41_band(0.05)
        assert low == pytest.approx(0.05 / 3)
        assert high == pytest.approx(2 / 6.7)

    def test_only_filters(self):
        results = run_checks(only=["capped-difference"])
        assert [r.name for r in results] == ["capped-difference"]
        assert results[0].number == 7


class TestPassingChecks:
    def test_toy_checks_pass(self):
        results = run_checks(VerifyOptions(), only=TOY_CHECKS)
        assert [r.status for r in results] == [PASS] * 4, [r.detail for r in results]

    def test_bound_checks_pass(self):
        results = run_checks(VerifyOptions(), only=BOUND_CHECKS)
        assert all(r.status == PASS for r in results), [r.detail for r in results]

    def test_lambda_outside_the_band_skips(self):
        results = run_checks(VerifyOptions(lam41=0.35), only=TOY_CHECKS[:2])
        assert [r.status for r in results] == [SKIP, SKIP]

    def test_slow_checks_skip_without_full(self):
        results = run_checks(VerifyOptions(full=False), only=["synthetic-recovery", "theta-consistency"])
        assert [r.status for r in results] == [SKIP, SKIP]
        assert "--full" in results[0].detail

    def test_determinism_check_reads_its_csv_back(self, mocker):
        spy = mocker.spy(acceptance, "read_csv_rows")
        (result,) = run_checks(only=["determinism-io"])
        assert result.status == PASS, result.detail
        assert spy.call_count == 1

    @pytest.mark.slow
    def test_default_run_has_no_failures(self):
        results = run_checks(VerifyOptions())
        assert not [r.name for r in results if r.status == FAIL]

    @pytest.mark.slow
    def test_full_run_has_no_failures(self):
        results = run_checks(VerifyOptions(full=True, recovery_seeds=2))
        assert not [r.name for r in results if r.status == FAIL]


class TestFaultInjection:
    def test_corrupted_prox_fails_the_moreau_check(self, mocker):
        corrupted = CorruptedProx(offset=1e-6)
        mocker.patch(PROX_PRIMAL, new=corrupted)
        (result,) = run_checks(only=["moreau-identity"])
        assert result.status == FAIL
        assert "Moreau" in result.detail
        assert corrupted.get_stats()["call_count"] > 0

    def test_nan_output_fails_too(self, mocker):
        corrupted = CorruptedProx()
        corrupted.set_failure_mode(True, "nan")
        mocker.patch(PROX_PRIMAL, new=corrupted)
        (result,) = run_checks(only=["moreau-identity"])
        assert result.status == FAIL

    def test_disabled_corruption_passes(self, mocker):
        corrupted = CorruptedProx()
        corrupted.set_failure_mode(False)
        mocker.patch(PROX_PRIMAL, new=corrupted)
        assert "max residual" in check_moreau_identity(VerifyOptions(), queries=500)

    def test_cli_exit_code(self, mocker, capsys):
        mocker.patch(PROX_PRIMAL, new=CorruptedProx(offset=1e-6))
        assert run_tool(["verify", "--only", "moreau-identity"]) == 1
        output = capsys.readouterr().out
        assert "FAIL" in output
        assert "moreau-identity" in output.splitlines()[-1]
