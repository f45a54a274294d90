import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from rejectlab.errors import InvalidParameterError
from rejectlab.models import FiniteTask, LossKind, RejectorKind, Temperature
from rejectlab.services.divergence_service import divergence_service
from rejectlab.services.loss_service import loss_service
from rejectlab.services.oracle_service import oracle_service
from rejectlab.services.prediction_service import prediction_service
from rejectlab.services.rejector_service import rejector_service
from rejectlab.services.sweep_service import auto_tau_grid, mask_lattice_grid

NONNEGATIVE_KINDS = (LossKind.ZERO_ONE, LossKind.LOG)


def all_masks(n):
    for index in range(2**n):
        yield ((index >> np.arange(n)) & 1).astype(bool)


class TestChowRule:
    def test_cost_above_every_risk_rejects_nothing(self, random_task):
        risks = loss_service.conditional_risks(LossKind.LOG, random_task)
        assert not rejector_service.chow_rule(LossKind.LOG, random_task, risks.max() + 0.1).any()

    def test_zero_cost_rejects_everything(self, random_task):
        assert rejector_service.chow_rule(LossKind.ZERO_ONE, random_task, 0.0).all()

    @pytest.mark.parametrize("kind", list(LossKind))
    @pytest.mark.parametrize("c", [0.0, 0.2, 0.6, 1.5])
    def test_matches_exhaustive_minimum(self, small_task, kind, c):
        mask = rejector_service.chow_rule(kind, small_task, c)
        _, best = oracle_service.exhaustive_rejector_search(kind, small_task, c)
        assert rejector_service.rejection_objective(kind, small_task, mask, c) == pytest.approx(best, abs=1e-12)

    def test_log_form_equals_chow_rule(self, make_task):
        for seed in range(50):
            task = make_task(n_inputs=7, n_labels=4, seed=seed)
            for c in (0.0, 0.4, 0.9, 1.7):
                assert np.array_equal(
                    rejector_service.chow_log_form(task, c), rejector_service.chow_rule(LossKind.LOG, task, c)
                )

    def test_log_form_perfect_model(self, perfect_task):
        c = math.log(perfect_task.n_labels) + 0.1
        assert not rejector_service.chow_log_form(perfect_task, c).any()

    def test_log_form_zero_cost(self, random_task):
        assert np.all(loss_service.entropies(random_task) > 0.0)
        assert rejector_service.chow_log_form(random_task, 0.0).all()


class TestDensityRatios:
    def test_constant_risk_gives_unit_scores(self, uniform_model_task):
        rejector = rejector_service.marginal_ratio(LossKind.LOG, uniform_model_task, 2.0)
        assert_allclose(rejector.array, 1.0, atol=1e-12)

    @pytest.mark.parametrize("kind", NONNEGATIVE_KINDS)
    def test_normalizer_at_most_one_for_nonnegative_losses(self, random_task, kind):
        assert rejector_service.marginal_ratio(kind, random_task, 1.5).normalizer <= 1.0
        assert rejector_service.joint_ratio(kind, random_task, 1.5).normalizer <= 1.0

    @pytest.mark.parametrize("kind", list(LossKind))
    @pytest.mark.parametrize("rejector_kind", list(RejectorKind))
    def test_scores_integrate_to_one(self, random_task, kind, rejector_kind):
        rejector = rejector_service.ratio(rejector_kind, kind, random_task, 0.7)
        assert random_task.marginal.array @ rejector.array == pytest.approx(1.0, abs=1e-12)
        assert np.all(rejector.array >= 0.0)

    def test_joint_equals_marginal_for_label_constant_loss(self, uniform_model_task):
        marginal = rejector_service.marginal_ratio(LossKind.LOG, uniform_model_task, 3.0)
        joint = rejector_service.joint_ratio(LossKind.LOG, uniform_model_task, 3.0)
        assert_allclose(joint.array, marginal.array, atol=1e-12)

    @pytest.mark.parametrize("lam", [1.2, 2.0, 7.5])
    def test_joint_weights_are_bhattacharyya_coefficients(self, random_task, lam):
        joint = rejector_service.joint_ratio(LossKind.MODIFIED_LOG, random_task, lam)
        coeffs = divergence_service.bhattacharyya_coeff_rows(
            1.0 / lam, prediction_service.model_posterior(random_task), random_task.bayes_posterior.array
        )
        assert_allclose(np.asarray(joint.weights), coeffs, atol=1e-12)

    def test_marginal_weights_are_exponentiated_kl(self, random_task):
        marginal = rejector_service.marginal_ratio(LossKind.MODIFIED_LOG, random_task, 2.5)
        kl = divergence_service.kl_rows(
            random_task.bayes_posterior.array, prediction_service.model_posterior(random_task)
        )
        assert_allclose(np.asarray(marginal.weights), np.exp(-kl / 2.5), atol=1e-12)


class TestThresholds:
    def test_zero_threshold_rejects_nothing(self, random_task):
        rejector = rejector_service.marginal_ratio(LossKind.LOG, random_task, 2.0)
        assert not rejector_service.threshold_reject(rejector, 0.0).any()

    def test_threshold_at_max_rejects_everything(self, random_task):
        rejector = rejector_service.joint_ratio(LossKind.LOG, random_task, 2.0)
        assert rejector_service.threshold_reject(rejector, float(rejector.array.max())).all()

    def test_masks_are_nested(self, random_task):
        rejector = rejector_service.marginal_ratio(LossKind.ZERO_ONE, random_task, 0.5)
        previous = np.zeros(random_task.n_inputs, dtype=bool)
        for tau in np.linspace(0.0, 2.0 * rejector.array.max(), 50):
            mask = rejector_service.threshold_reject(rejector, tau)
            assert np.all(mask[previous])
            previous = mask

    def test_negative_ratio_threshold(self, random_task):
        rejector = rejector_service.marginal_ratio(LossKind.LOG, random_task, 2.0)
        with pytest.raises(ValueError):
            rejector_service.threshold_reject(rejector, -1.0)

    @pytest.mark.parametrize("rejector_kind", list(RejectorKind))
    def test_tau_kappa_inverse(self, random_task, rejector_kind):
        rejector = rejector_service.ratio(rejector_kind, LossKind.LOG, random_task, 3.0)
        for tau in (0.1, 0.8, 1.3):
            kappa = rejector_service.kappa_for_tau(rejector, tau)
            assert rejector_service.tau_for_kappa(rejector, kappa) == pytest.approx(tau, rel=1e-12)

    def test_zero_tau_maps_to_infinite_kappa(self, random_task):
        rejector = rejector_service.marginal_ratio(LossKind.LOG, random_task, 3.0)
        assert rejector_service.kappa_for_tau(rejector, 0.0) == math.inf

    def test_cost_for_tau_matches_chow(self, random_task):
        rejector = rejector_service.marginal_ratio(LossKind.LOG, random_task, 1.5)
        for tau in mask_lattice_grid(rejector.array)[1:]:
            c = rejector_service.cost_for_tau(rejector, tau)
            assert np.array_equal(
                rejector_service.chow_rule(LossKind.LOG, random_task, max(c, 0.0)),
                rejector_service.threshold_reject(rejector, tau),
            )

    def test_cost_for_tau_needs_marginal_ratio(self, random_task):
        rejector = rejector_service.joint_ratio(LossKind.LOG, random_task, 1.5)
        with pytest.raises(InvalidParameterError):
            rejector_service.cost_for_tau(rejector, 0.5)


class TestDivergenceRejectors:
    def test_bhatta_perfect_model(self, perfect_task):
        assert not rejector_service.bhatta_rejector(perfect_task, 2.0, 0.1).any()

    def test_bhatta_zero_threshold_rejects_everything(self, random_task):
        assert rejector_service.bhatta_rejector(random_task, 2.0, 0.0).all()

    def test_bhatta_needs_lambda_above_one(self, random_task):
        with pytest.raises(InvalidParameterError):
            rejector_service.bhatta_rejector(random_task, 1.0, 0.1)

    def test_kl_perfect_model(self, perfect_task):
        assert not rejector_service.kl_rejector(perfect_task, 2.0, 0.1).any()

    @pytest.mark.parametrize("lam", [1.5, 4.0, 25.0])
    def test_bhatta_matches_joint_ratio(self, make_task, lam):
        for seed in range(10):
            task = make_task(n_inputs=9, n_labels=3, seed=seed)
            joint = rejector_service.joint_ratio(LossKind.MODIFIED_LOG, task, lam)
            divergences = rejector_service.divergence_scores(joint, task)
            for tau in auto_tau_grid(joint.array):
                kappa = rejector_service.kappa_for_tau(joint, tau, divergences)
                assert np.array_equal(
                    rejector_service.bhatta_rejector(task, lam, kappa),
                    rejector_service.threshold_reject(joint, tau),
                )

    @pytest.mark.parametrize("lam", [0.3, 1.0, 6.0])
    def test_kl_matches_marginal_ratio(self, make_task, lam):
        for seed in range(10):
            task = make_task(n_inputs=9, n_labels=3, seed=seed)
            marginal = rejector_service.marginal_ratio(LossKind.MODIFIED_LOG, task, lam)
            divergences = rejector_service.divergence_scores(marginal, task)
            for tau in auto_tau_grid(marginal.array):
                kappa = rejector_service.kappa_for_tau(marginal, tau, divergences)
                assert np.array_equal(
                    rejector_service.kl_rejector(task, lam, kappa),
                    rejector_service.threshold_reject(marginal, tau),
                )

    def test_coefficient_form_matches_joint_ratio(self, random_task):
        lam = Temperature(value=3.0)
        joint = rejector_service.joint_ratio(LossKind.MODIFIED_LOG, random_task, lam)
        for tau in mask_lattice_grid(joint.array):
            assert np.array_equal(
                rejector_service.bhatta_coeff_rejector(random_task, lam, joint.normalizer * tau),
                rejector_service.threshold_reject(joint, tau),
            )

    @pytest.mark.parametrize("kappa", [0.01, 0.05, 0.2, 0.5])
    def test_kl_contains_bhatta(self, random_task, kappa):
        lam = 3.0
        bhatta = rejector_service.bhatta_rejector(random_task, lam, kappa)
        kl = rejector_service.kl_rejector(random_task, lam, lam * kappa)
        assert np.all(kl[bhatta])

    def test_kl_contains_bhatta_at_zero_kappa(self, perfect_task):
        bhatta = rejector_service.bhatta_rejector(perfect_task, 2.0, 0.0)
        kl = rejector_service.kl_rejector(perfect_task, 2.0, 0.0)
        assert np.all(kl[bhatta])

    def test_zero_kappa_rejects_everything_on_perfect_model(self, perfect_task):
        assert rejector_service.kl_rejector(perfect_task, 2.0, 0.0).all()
        assert rejector_service.bhatta_rejector(perfect_task, 2.0, 0.0).all()
        assert rejector_service.chow_rule(LossKind.MODIFIED_LOG, perfect_task, 0.0).all()

    def test_exact_score_thresholds_match_divergence_masks(self, random_task):
        marginal = rejector_service.marginal_ratio(LossKind.MODIFIED_LOG, random_task, 2.0)
        divergences = rejector_service.divergence_scores(marginal, random_task)
        for tau in marginal.array:
            kappa = rejector_service.kappa_for_tau(marginal, float(tau), divergences)
            mask = rejector_service.threshold_reject(marginal, float(tau))
            assert mask[np.argmin(np.abs(marginal.array - tau))]
            assert np.array_equal(rejector_service.kl_rejector(random_task, 2.0, kappa), mask)

    def test_huge_negative_kappa_rejects_everything(self, random_task):
        joint = rejector_service.joint_ratio(LossKind.LOG, random_task, 2.0)
        assert rejector_service.tau_for_kappa(joint, -1000.0) == math.inf
        assert rejector_service.divergence_reject(joint, -1000.0).all()
        assert not rejector_service.divergence_reject(joint, math.inf).any()

    def test_divergence_reject_matches_tau(self, random_task):
        marginal = rejector_service.marginal_ratio(LossKind.LOG, random_task, 2.0)
        for tau in mask_lattice_grid(marginal.array)[1:]:
            kappa = rejector_service.kappa_for_tau(marginal, tau)
            assert np.array_equal(
                rejector_service.divergence_reject(marginal, kappa),
                rejector_service.threshold_reject(marginal, tau),
            )


class TestSaturatedLogits:
    @pytest.fixture
    def saturated_task(self):
        return FiniteTask.from_arrays([0.5, 0.5], [[0.5, 0.5], [0.5, 0.5]], [[1000.0, 0.0], [0.0, 1000.0]])

    @pytest.mark.parametrize("kind", [LossKind.LOG, LossKind.MODIFIED_LOG])
    def test_ratios_stay_finite(self, saturated_task, kind):
        for rejector in (
            rejector_service.marginal_ratio(kind, saturated_task, 2.0),
            rejector_service.joint_ratio(kind, saturated_task, 2.0),
        ):
            assert np.all(np.isfinite(rejector.array))
            assert float(saturated_task.marginal.array @ rejector.array) == pytest.approx(1.0)

    def test_log_loss_risk_is_finite(self, saturated_task):
        risks = loss_service.conditional_risks(LossKind.LOG, saturated_task)
        assert_allclose(risks, [500.0, 500.0])


class TestObjectives:
    def test_all_rejected_costs_c(self, random_task):
        mask = np.ones(random_task.n_inputs, dtype=bool)
        assert rejector_service.rejection_objective(LossKind.LOG, random_task, mask, 0.4) == pytest.approx(0.4, abs=1e-12)

    def test_nothing_rejected_is_full_risk(self, random_task):
        mask = np.zeros(random_task.n_inputs, dtype=bool)
        risks = loss_service.conditional_risks(LossKind.ZERO_ONE, random_task)
        assert rejector_service.rejection_objective(LossKind.ZERO_ONE, random_task, mask, 0.4) == pytest.approx(
            float(random_task.marginal.array @ risks), abs=1e-12
        )

    def test_cascade_all_deferred(self, random_task):
        mask = np.ones(random_task.n_inputs, dtype=bool)
        expected_entropy = float(random_task.marginal.array @ loss_service.entropies(random_task))
        assert rejector_service.cascade_objective(random_task, mask, 0.3) == pytest.approx(
            2.0 * expected_entropy + 0.3, abs=1e-12
        )

    def test_cascade_offset_is_mask_independent(self, make_task):
        task = make_task(n_inputs=6, n_labels=3, seed=8)
        offset = rejector_service.cascade_offset(task)
        for mask in all_masks(task.n_inputs):
            difference = rejector_service.cascade_objective(task, mask, 0.7) - rejector_service.rejection_objective(
                LossKind.MODIFIED_LOG, task, mask, 0.7
            )
            assert difference == pytest.approx(offset, abs=1e-12)

    def test_cascade_perfect_model_prefers_no_deferral(self, perfect_task):
        values = [rejector_service.cascade_objective(perfect_task, mask, 0.2) for mask in all_masks(perfect_task.n_inputs)]
        assert int(np.argmin(values)) == 0


class TestRatioRelationCheck:
    @pytest.mark.parametrize("kind", list(LossKind))
    @pytest.mark.parametrize("lam", [0.4, 1.0, 3.0])
    def test_random_tasks_pass(self, make_task, kind, lam):
        for seed in range(5):
            report = rejector_service.ratio_relation_check(kind, make_task(n_inputs=10, n_labels=4, seed=seed), lam)
            assert report.passed
            assert report.rejector_violations == 0
            assert report.n_thresholds == 100

    def test_constant_loss_is_tight(self, uniform_model_task):
        report = rejector_service.ratio_relation_check(LossKind.LOG, uniform_model_task, 2.0)
        assert report.passed
        assert report.weight_slack == pytest.approx(0.0, abs=1e-12)
        assert report.normalizer_slack == pytest.approx(0.0, abs=1e-12)
