import logging
import math

import numpy as np
import pytest

from rejectlab.errors import InvalidInputError, InvalidParameterError
from rejectlab.models import LossKind
from rejectlab.services.loss_service import loss_service
from rejectlab.services.rejector_service import rejector_service
from rejectlab.services.sweep_service import (
    REJECTOR_FLAGS,
    auto_tau_grid,
    mask_lattice_grid,
    read_tau_grid,
    sweep_service,
)


class TestGrids:
    def test_lattice_grid(self):
        grid = mask_lattice_grid([0.5, 1.5, 0.5, 2.0])
        assert grid.tolist() == [0.0, 1.0, 1.75, 4.0]

    def test_auto_grid_adds_scores(self):
        grid = auto_tau_grid([0.5, 1.5])
        assert grid.tolist() == [0.0, 0.5, 1.0, 1.5, 3.0]

    def test_read_tau_grid(self, tmp_path):
        path = tmp_path / "grid.txt"
        path.write_text("# taus\n0.0\n\n0.5  # half\n1.25\n", encoding="utf-8")
        assert read_tau_grid(path).tolist() == [0.0, 0.5, 1.25]

    def test_read_tau_grid_bad_value(self, tmp_path):
        path = tmp_path / "grid.txt"
        path.write_text("0.1\nabc\n", encoding="utf-8")
        with pytest.raises(InvalidInputError):
            read_tau_grid(path)

    def test_read_tau_grid_missing_file(self, tmp_path):
        with pytest.raises(InvalidInputError):
            read_tau_grid(tmp_path / "missing.txt")


class TestSweep:
    def test_extreme_thresholds(self, random_task):
        rejector = rejector_service.marginal_ratio(LossKind.LOG, random_task, 2.0)
        risks = loss_service.conditional_risks(LossKind.LOG, random_task)
        low = 0.5 * float(rejector.array.min())
        high = 2.0 * float(rejector.array.max())
        rows = sweep_service.sweep(random_task, LossKind.LOG, 2.0, "marginal", [low, high]).rows
        assert rows[0].rejection_rate == 0.0
        assert rows[0].n_rejected == 0
        assert rows[0].selective_risk == pytest.approx(float(random_task.marginal.array @ risks))
        assert rows[1].rejection_rate == pytest.approx(1.0)
        assert rows[1].selective_risk == 0.0
        assert rows[1].n_rejected == random_task.n_inputs

    @pytest.mark.parametrize("kind", [LossKind.ZERO_ONE, LossKind.LOG])
    def test_selective_risk_non_increasing(self, make_task, kind):
        for seed in range(20):
            task = make_task(n_inputs=12, n_labels=3, seed=seed)
            rows = sweep_service.sweep(task, kind, 1.5, "marginal").rows
            risks = np.array([row.selective_risk for row in rows])
            assert np.all(np.diff(risks) <= 1e-15)

    @pytest.mark.parametrize("rejector", REJECTOR_FLAGS)
    def test_rejection_rate_non_decreasing(self, random_task, rejector):
        result = sweep_service.sweep(random_task, LossKind.MODIFIED_LOG, 2.0, rejector)
        rates = [row.rejection_rate for row in result.rows]
        assert rates == sorted(rates)
        assert result.rows[0].tau == 0.0
        assert result.rejector == rejector

    @pytest.mark.parametrize(
        "reference,rejector",
        [("marginal", "kl"), ("marginal", "chow"), ("joint", "bhatta")],
    )
    def test_divergence_rejectors_track_ratio_masks(self, make_task, reference, rejector):
        for seed in range(50):
            task = make_task(n_inputs=9, n_labels=3, seed=seed)
            ratio_rows = sweep_service.sweep(task, LossKind.MODIFIED_LOG, 2.0, reference).rows
            divergence_rows = sweep_service.sweep(task, LossKind.MODIFIED_LOG, 2.0, rejector).rows
            assert [row.tau for row in ratio_rows] == [row.tau for row in divergence_rows]
            for left, right in zip(ratio_rows, divergence_rows):
                assert left.mask_hash == right.mask_hash, (seed, left.tau)

    def test_default_grid_holds_exact_scores(self, random_task):
        scores = rejector_service.marginal_ratio(LossKind.MODIFIED_LOG, random_task, 2.0).array
        taus = {row.tau for row in sweep_service.sweep(random_task, LossKind.MODIFIED_LOG, 2.0, "kl").rows}
        assert set(scores.tolist()) <= taus

    def test_kappa_column(self, random_task):
        rows = sweep_service.sweep(random_task, LossKind.LOG, 2.0, "marginal").rows
        assert rows[0].kappa == math.inf
        assert all(math.isfinite(row.kappa) for row in rows[1:])

    def test_bad_grids(self, random_task):
        for grid in ([], [0.5, 0.1], [-1.0, 0.5], [0.0, math.nan]):
            with pytest.raises(InvalidInputError):
                sweep_service.sweep(random_task, LossKind.LOG, 2.0, "marginal", grid)

    def test_unknown_rejector(self, random_task):
        with pytest.raises(InvalidParameterError):
            sweep_service.sweep(random_task, LossKind.LOG, 2.0, "oracle")

    def test_bhatta_needs_lambda_above_one(self, random_task):
        with pytest.raises(InvalidParameterError):
            sweep_service.sweep(random_task, LossKind.MODIFIED_LOG, 0.5, "bhatta")


class TestRiskCoverageCurve:
    def test_coverage_increases(self, random_task):
        curve = sweep_service.risk_coverage_curve(random_task, LossKind.ZERO_ONE, 2.0, "joint")
        coverages = [row.coverage for row in curve]
        assert coverages == sorted(coverages)
        assert curve[-1].coverage == pytest.approx(1.0)
        assert curve[0].selective_risk == 0.0

    def test_full_coverage_risk(self, random_task):
        curve = sweep_service.risk_coverage_curve(random_task, LossKind.ZERO_ONE, 2.0, "marginal")
        risks = loss_service.conditional_risks(LossKind.ZERO_ONE, random_task)
        assert curve[-1].selective_risk_normalized == pytest.approx(float(random_task.marginal.array @ risks))


class TestCompareRejectors:
    def test_random_tasks_have_no_violations(self, make_task):
        for seed in range(25):
            for lam in (1.5, 3.0, 50.0):
                report = sweep_service.compare_rejectors(make_task(n_inputs=10, n_labels=4, seed=seed), lam)
                assert report.violations == 0
                assert all(row.only_joint == 0 for row in report.rows)

    def test_counts_cover_every_input(self, random_task):
        report = sweep_service.compare_rejectors(random_task, 2.0)
        for row in report.rows:
            assert row.both + row.only_marginal + row.only_joint + row.neither == random_task.n_inputs

    def test_constant_loss_masks_agree(self, uniform_model_task):
        grid = [0.0, 0.5, 2.0]
        report = sweep_service.compare_rejectors(uniform_model_task, 2.0, grid, LossKind.LOG)
        for row in report.rows:
            assert row.only_marginal == 0
            assert row.only_joint == 0

    def test_perfect_model_rejects_nothing_above_zero_kappa(self, perfect_task):
        report = sweep_service.compare_rejectors(perfect_task, 2.0, [0.0, 0.5])
        assert all(row.neither == perfect_task.n_inputs for row in report.rows)
        assert report.rows[1].kappa > 0.0

    def test_needs_lambda_above_one(self, random_task):
        with pytest.raises(InvalidParameterError):
            sweep_service.compare_rejectors(random_task, 1.0)


def test_sweep_logs_below_info(random_task, caplog):
    with caplog.at_level(logging.INFO, logger="rejectlab.services.sweep_service"):
        sweep_service.sweep(random_task, LossKind.LOG, 2.0, "marginal")
    assert not [record for record in caplog.records if record.levelno >= logging.INFO]
