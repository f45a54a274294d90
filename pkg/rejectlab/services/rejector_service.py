"""Chow's rule, ideal density-ratio rejectors and the rejection objectives"""

import logging
import math

import numpy as np
from scipy.special import logsumexp

from rejectlab.config import IDENTITY_TOLERANCE, PROB_TOLERANCE
from rejectlab.errors import InvalidInputError, InvalidParameterError
from rejectlab.models.rejector import (
    DensityRatioRejector,
    LossKind,
    RatioRelationReport,
    RejectionCost,
    RejectorKind,
    Temperature,
    Threshold,
    ThresholdScale,
)
from rejectlab.models.task import FiniteTask, readonly
from rejectlab.services.divergence_service import divergence_service
from rejectlab.services.loss_service import loss_service
from rejectlab.services.prediction_service import as_mask, prediction_service

logger = logging.getLogger(__name__)


def _temperature(value) -> Temperature:
    return value if isinstance(value, Temperature) else Temperature(value=value)


def _cost(value) -> float:
    return (value if isinstance(value, RejectionCost) else RejectionCost(value=value)).value


def _threshold(value, scale: ThresholdScale) -> float:
    if not isinstance(value, Threshold):
        value = Threshold(value=value, scale=scale)
    if value.scale is not scale:
        raise InvalidParameterError(f"expected a {scale.value}-scale threshold, got {value.scale.value}")
    return value.value


def _build_rejector(kind, loss, lam, log_weights, task) -> DensityRatioRejector:
    marginal = task.marginal.array
    # fixed summation order keeps normalizers bit-reproducible
    log_normalizer = float(logsumexp(log_weights, b=marginal))
    scores = np.exp(log_weights - log_normalizer)
    total = math.fsum(marginal * scores)
    if abs(total - 1.0) > PROB_TOLERANCE:
        raise InvalidInputError(f"density ratio integrates to {total!r} against P_x")
    return DensityRatioRejector(
        kind=kind,
        loss=loss,
        temperature=lam.value,
        scores=tuple(scores.tolist()),
        weights=tuple(np.exp(log_weights).tolist()),
        normalizer=math.exp(log_normalizer),
        log_normalizer=log_normalizer,
    )


class RejectorService:
    """Service for building rejectors and evaluating rejection objectives"""

    def chow_rule(self, kind: LossKind, task: FiniteTask, c) -> np.ndarray:
        """Reject wherever the conditional risk reaches the cost (ties reject)"""
        return loss_service.conditional_risks(kind, task) >= _cost(c)

    def chow_log_form(self, task: FiniteTask, c) -> np.ndarray:
        """Chow's rule for the log-loss written as KL(pi* || pi) >= c - H(pi*)"""
        return divergence_service.task_kl(task) >= _cost(c) - loss_service.entropies(task)

    def marginal_ratio(self, kind: LossKind, task: FiniteTask, lam) -> DensityRatioRejector:
        """alpha(x) = exp(-risk(x)/lambda) / Z with Z = E_{P_x}[exp(-risk/lambda)]"""
        lam = _temperature(lam)
        log_weights = -loss_service.conditional_risks(kind, task) / lam.value
        return _build_rejector(RejectorKind.MARGINAL, LossKind(kind), lam, log_weights, task)

    def _joint_log_weights(self, kind: LossKind, task: FiniteTask, lam: Temperature) -> np.ndarray:
        if LossKind(kind) is LossKind.MODIFIED_LOG and lam.above_one:
            # bitwise the rows bhatta_rejector thresholds
            return -divergence_service.task_bhattacharyya_div(task, lam.bhattacharyya_skew())
        bayes = task.bayes_posterior.array
        exponents = np.where(bayes > 0.0, -loss_service.loss_matrix(kind, task) / lam.value, -np.inf)
        return logsumexp(exponents, b=bayes, axis=1)

    def joint_ratio(self, kind: LossKind, task: FiniteTask, lam) -> DensityRatioRejector:
        """alpha_j(x) = E_{pi*(x)}[exp(-loss/lambda)] / Z_j with Z_j = E_P[exp(-loss/lambda)]"""
        lam = _temperature(lam)
        log_weights = self._joint_log_weights(kind, task, lam)
        return _build_rejector(RejectorKind.JOINT, LossKind(kind), lam, log_weights, task)

    def ratio(self, rejector_kind: RejectorKind, kind: LossKind, task: FiniteTask, lam) -> DensityRatioRejector:
        if RejectorKind(rejector_kind) is RejectorKind.MARGINAL:
            return self.marginal_ratio(kind, task, lam)
        return self.joint_ratio(kind, task, lam)

    def threshold_reject(self, rejector: DensityRatioRejector, tau) -> np.ndarray:
        """Reject where the ideal density ratio is at most tau"""
        return rejector.array <= _threshold(tau, ThresholdScale.RATIO)

    def kappa_for_tau(self, rejector: DensityRatioRejector, tau, divergences=None) -> float:
        """Divergence-scale threshold equivalent to ratio threshold tau.

        Marginal: kappa = -lambda * log(Z * tau), a threshold on the
        conditional risk (KL under the modified log-loss). Joint:
        kappa_j = -log(Z_j * tau), a threshold on -log(Z_j * alpha_j)
        (the skewed Bhattacharyya divergence under the modified log-loss).

        Given the per-input divergences the divergence-scale rejector
        compares, the returned kappa reproduces the ratio mask exactly,
        ties included.
        """
        tau = _threshold(tau, ThresholdScale.RATIO)
        if tau == 0.0:
            nominal = math.inf
        else:
            log_scaled = rejector.log_normalizer + math.log(tau)
            nominal = -rejector.temperature * log_scaled if rejector.kind is RejectorKind.MARGINAL else -log_scaled
        if divergences is None:
            return nominal

        divergences = np.asarray(divergences, dtype=np.float64)
        target = self.threshold_reject(rejector, tau)
        if np.array_equal(divergences >= nominal, target):
            return nominal
        if target.any():
            matched = float(divergences[target].min())
        else:
            matched = float(np.nextafter(divergences.max(), math.inf))
        if not np.array_equal(divergences >= matched, target):
            logger.warning("No divergence threshold reproduces the ratio mask at tau=%r", tau)
            return nominal
        logger.debug("Moved kappa %r to %r to match the ratio mask at tau=%r", nominal, matched, tau)
        return matched

    def divergence_scores(self, rejector: DensityRatioRejector, task: FiniteTask) -> np.ndarray:
        """Per-input statistic its divergence-scale rejector compares against kappa.

        Marginal: the conditional risk. Joint: -log(Z_j * alpha_j), the
        Bhattacharyya divergence under the modified log-loss.
        """
        if rejector.kind is RejectorKind.MARGINAL:
            return loss_service.conditional_risks(rejector.loss, task)
        lam = Temperature(value=rejector.temperature)
        return readonly(-self._joint_log_weights(rejector.loss, task, lam))

    def tau_for_kappa(self, rejector: DensityRatioRejector, kappa) -> float:
        """Ratio-scale threshold for kappa; +inf when it exceeds the float range"""
        kappa = _threshold(kappa, ThresholdScale.DIVERGENCE)
        if rejector.kind is RejectorKind.MARGINAL:
            exponent = -kappa / rejector.temperature - rejector.log_normalizer
        else:
            exponent = -kappa - rejector.log_normalizer
        try:
            return math.exp(exponent)
        except OverflowError:
            return math.inf

    def divergence_reject(self, rejector: DensityRatioRejector, kappa) -> np.ndarray:
        """The ratio rejector at the tau matching kappa, compared as log(alpha) <= log(tau)"""
        kappa = _threshold(kappa, ThresholdScale.DIVERGENCE)
        if rejector.kind is RejectorKind.MARGINAL:
            log_tau = -kappa / rejector.temperature - rejector.log_normalizer
        else:
            log_tau = -kappa - rejector.log_normalizer
        with np.errstate(divide="ignore"):
            return np.log(rejector.array) <= log_tau

    def cost_for_tau(self, rejector: DensityRatioRejector, tau) -> float:
        """Chow cost whose mask matches the marginal rejector at tau"""
        if rejector.kind is not RejectorKind.MARGINAL:
            raise InvalidParameterError("only marginal ratios map thresholds onto Chow costs")
        return self.kappa_for_tau(rejector, tau)

    def bhatta_rejector(self, task: FiniteTask, lam, kappa_j) -> np.ndarray:
        """Reject where B_{1-1/lambda}(pi* || pi) >= kappa_j; needs lambda > 1"""
        skew = _temperature(lam).bhattacharyya_skew()
        kappa_j = _threshold(kappa_j, ThresholdScale.DIVERGENCE)
        return divergence_service.task_bhattacharyya_div(task, skew) >= kappa_j

    def bhatta_coeff_rejector(self, task: FiniteTask, lam, tau_c) -> np.ndarray:
        """Reject where BC_{1/lambda}(pi || pi*) <= tau_c; the coefficient lies in [0, 1]"""
        skew = _temperature(lam).coefficient_skew()
        tau_c = _threshold(tau_c, ThresholdScale.RATIO)
        coeffs = divergence_service.bhattacharyya_coeff_rows(
            skew, prediction_service.model_posterior(task), task.bayes_posterior.array
        )
        return coeffs <= tau_c

    def kl_rejector(self, task: FiniteTask, lam, kappa) -> np.ndarray:
        """Reject where KL(pi* || pi) >= kappa"""
        _temperature(lam)
        kappa = _threshold(kappa, ThresholdScale.DIVERGENCE)
        return divergence_service.task_kl(task) >= kappa

    def rejection_objective(self, kind: LossKind, task: FiniteTask, mask, c) -> float:
        """E_P[(1 - r) * loss] + c * P[r = 1]"""
        mask = as_mask(mask, task.n_inputs)
        per_input = np.where(mask, _cost(c), loss_service.conditional_risks(kind, task))
        return float(task.marginal.array @ per_input)

    def cascade_objective(self, task: FiniteTask, mask, c) -> float:
        """Route accepted inputs to h and rejected ones to the Bayes model, both under log-loss.

        Equals rejection_objective(modified_log_loss) + cascade_offset(task)
        for every mask.
        """
        mask = as_mask(mask, task.n_inputs)
        marginal = task.marginal.array
        entropies = loss_service.entropies(task)
        model_risks = loss_service.conditional_risks(LossKind.LOG, task)
        routed = np.where(mask, entropies, model_risks)
        return float(marginal @ routed + _cost(c) * (marginal @ mask) + marginal @ entropies)

    def cascade_offset(self, task: FiniteTask) -> float:
        """2 * E_{P_x}[H(pi*(X))]: the log-loss paid on each branch carries one entropy, plus the added one"""
        return float(2.0 * (task.marginal.array @ loss_service.entropies(task)))

    def ratio_relation_check(self, kind: LossKind, task: FiniteTask, lam, tau_grid=None) -> RatioRelationReport:
        """Check Z*alpha <= Z_j*alpha_j, Z <= Z_j and the matched-threshold containment"""
        marginal = self.marginal_ratio(kind, task, lam)
        joint = self.joint_ratio(kind, task, lam)
        weight_gap = np.asarray(joint.weights) - np.asarray(marginal.weights)
        weight_slack = float(weight_gap.min())
        ratio = math.exp(marginal.log_normalizer - joint.log_normalizer)
        normalizer_slack = 1.0 - ratio

        if tau_grid is None:
            top = max(marginal.array.max(), joint.array.max())
            tau_grid = np.linspace(0.0, 1.5 * top, 100)
        scores = marginal.array
        rejector_slack = math.inf
        violations = 0
        for tau in np.asarray(tau_grid, dtype=np.float64):
            joint_mask = self.threshold_reject(joint, float(ratio * tau))
            if not joint_mask.any():
                continue
            gaps = tau - scores[joint_mask]
            rejector_slack = min(rejector_slack, float(gaps.min()))
            violations += int(np.count_nonzero(gaps < -IDENTITY_TOLERANCE * max(1.0, tau)))

        passed = (
            weight_slack >= -IDENTITY_TOLERANCE
            and normalizer_slack >= -IDENTITY_TOLERANCE
            and violations == 0
        )
        if not passed:
            logger.warning(
                "Joint/marginal ratio relation violated: weight slack %.3g, normalizer slack %.3g, %d rejector violations",
                weight_slack,
                normalizer_slack,
                violations,
            )
        return RatioRelationReport(
            passed=passed,
            weight_slack=weight_slack,
            normalizer_slack=normalizer_slack,
            rejector_slack=rejector_slack,
            rejector_violations=violations,
            n_thresholds=len(tau_grid),
        )


# Singleton instance
rejector_service = RejectorService()
