"""Threshold sweeps, risk-coverage curves and marginal/joint rejector agreement"""

import logging
import math
import os
from typing import Optional, Sequence

import numpy as np

from rejectlab.errors import InvalidInputError, InvalidParameterError
from rejectlab.models.harness import (
    AgreementReport,
    AgreementRow,
    RiskCoverageRow,
    SweepResult,
    SweepRow,
)
from rejectlab.models.rejector import DensityRatioRejector, LossKind, Temperature
from rejectlab.models.task import FiniteTask
from rejectlab.services.loss_service import loss_service
from rejectlab.services.rejector_service import rejector_service
from rejectlab.storage.table_store import mask_hash
from rejectlab.storage.task_store import fingerprint

logger = logging.getLogger(__name__)

REJECTOR_FLAGS = ("chow", "marginal", "joint", "bhatta", "kl")


def mask_lattice_grid(scores) -> np.ndarray:
    """One tau per achievable nested mask: 0, midpoints of consecutive distinct scores, 2 * max"""
    distinct = np.unique(np.asarray(scores, dtype=np.float64))
    midpoints = (distinct[:-1] + distinct[1:]) / 2.0
    return np.unique(np.concatenate([[0.0], midpoints, [2.0 * distinct[-1]]]))


def auto_tau_grid(scores) -> np.ndarray:
    """Distinct scores, their midpoints, 0 and 2 * max, sorted"""
    distinct = np.unique(np.asarray(scores, dtype=np.float64))
    return np.unique(np.concatenate([mask_lattice_grid(distinct), distinct]))


def read_tau_grid(path) -> np.ndarray:
    """One float per line; blank lines and '#' comments skipped"""
    if not os.path.isfile(path):
        raise InvalidInputError(f"tau grid file not found: {path}")
    values = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            line = line.split("#", 1)[0].strip()
            if line:
                try:
                    values.append(float(line))
                except ValueError:
                    raise InvalidInputError(f"bad tau value {line!r} in {path}") from None
    return np.asarray(values, dtype=np.float64)


def _check_grid(tau_grid) -> np.ndarray:
    grid = np.asarray(tau_grid, dtype=np.float64)
    if grid.ndim != 1 or grid.size == 0:
        raise InvalidInputError("tau grid is empty")
    if not np.all(np.isfinite(grid)) or np.any(grid < 0.0):
        raise InvalidInputError("tau grid values must be finite and >= 0")
    if np.any(np.diff(grid) < 0.0):
        raise InvalidInputError("tau grid must be sorted ascending")
    return grid


class SweepService:
    """Service for evaluating rejectors across threshold grids"""

    def _reference_ratio(self, rejector: str, kind: LossKind, task: FiniteTask, lam) -> DensityRatioRejector:
        """The density ratio whose tau scale indexes a sweep of the given rejector"""
        if rejector in ("chow", "marginal"):
            return rejector_service.marginal_ratio(kind, task, lam)
        if rejector == "joint":
            return rejector_service.joint_ratio(kind, task, lam)
        if rejector == "kl":
            return rejector_service.marginal_ratio(LossKind.MODIFIED_LOG, task, lam)
        if rejector == "bhatta":
            return rejector_service.joint_ratio(LossKind.MODIFIED_LOG, task, lam)
        raise InvalidParameterError(f"unknown rejector {rejector!r}; expected one of {', '.join(REJECTOR_FLAGS)}")

    def _mask(self, rejector: str, kind, task, lam, ratio, tau: float, kappa: float) -> np.ndarray:
        if rejector in ("marginal", "joint"):
            return rejector_service.threshold_reject(ratio, tau)
        if rejector == "kl":
            return rejector_service.kl_rejector(task, lam, kappa)
        if rejector == "bhatta":
            return rejector_service.bhatta_rejector(task, lam, kappa)
        # chow: the marginal divergence-scale threshold is a rejection cost
        if math.isinf(kappa):
            return np.zeros(task.n_inputs, dtype=bool)
        return rejector_service.chow_rule(kind, task, max(kappa, 0.0))

    def default_grid(self, rejector: str, kind: LossKind, task: FiniteTask, lam) -> np.ndarray:
        return auto_tau_grid(self._reference_ratio(rejector, LossKind(kind), task, lam).array)

    def sweep(
        self,
        task: FiniteTask,
        kind: LossKind,
        lam,
        rejector: str = "marginal",
        tau_grid: Optional[Sequence[float]] = None,
    ) -> SweepResult:
        """Rejection rate and selective risk of one rejector at every tau"""
        kind = LossKind(kind)
        lam = lam if isinstance(lam, Temperature) else Temperature(value=lam)
        ratio = self._reference_ratio(rejector, kind, task, lam)
        grid = auto_tau_grid(ratio.array) if tau_grid is None else _check_grid(tau_grid)
        marginal = task.marginal.array
        risks = loss_service.conditional_risks(kind, task)
        divergences = rejector_service.divergence_scores(ratio, task)

        rows = []
        for tau in grid.tolist():
            kappa = rejector_service.kappa_for_tau(ratio, tau, divergences)
            mask = self._mask(rejector, kind, task, lam, ratio, tau, kappa)
            rows.append(
                SweepRow(
                    tau=tau,
                    kappa=kappa,
                    rejection_rate=min(float(marginal @ mask), 1.0),
                    selective_risk=float(marginal @ np.where(mask, 0.0, risks)),
                    n_rejected=int(np.count_nonzero(mask)),
                    mask_hash=mask_hash(mask),
                )
            )
        logger.debug("Swept %s rejector over %d thresholds (loss %s, lambda %g)", rejector, len(rows), kind.value, lam.value)
        return SweepResult(
            loss=kind.value,
            temperature=lam.value,
            rejector=rejector,
            task_fingerprint=fingerprint(task),
            rows=tuple(rows),
        )

    def risk_coverage_curve(
        self,
        task: FiniteTask,
        kind: LossKind,
        lam,
        rejector: str = "marginal",
        tau_grid: Optional[Sequence[float]] = None,
    ) -> list[RiskCoverageRow]:
        """Coverage 1 - P[r = 1] against selective risk, ordered by increasing coverage"""
        result = self.sweep(task, kind, lam, rejector, tau_grid)
        curve = []
        for row in reversed(result.rows):
            coverage = max(0.0, 1.0 - row.rejection_rate)
            normalized = row.selective_risk / coverage if coverage > 0.0 else 0.0
            curve.append(
                RiskCoverageRow(
                    coverage=coverage,
                    selective_risk=row.selective_risk,
                    selective_risk_normalized=normalized,
                    tau=row.tau,
                )
            )
        return curve

    def compare_rejectors(
        self,
        task: FiniteTask,
        lam,
        tau_grid: Optional[Sequence[float]] = None,
        kind: LossKind = LossKind.MODIFIED_LOG,
    ) -> AgreementReport:
        """Overlap of the joint rejector at tau and the marginal one at (Z_j/Z) * tau.

        The joint mask must be contained in the marginal mask; on the
        divergence scale the Bhattacharyya rejector at kappa must be
        contained in the KL rejector at lambda * kappa.
        """
        lam = lam if isinstance(lam, Temperature) else Temperature(value=lam)
        if not lam.above_one:
            raise InvalidParameterError(f"comparing rejectors needs lambda > 1, got {lam.value}")
        marginal = rejector_service.marginal_ratio(kind, task, lam)
        joint = rejector_service.joint_ratio(kind, task, lam)
        divergence_joint = (
            joint if LossKind(kind) is LossKind.MODIFIED_LOG
            else rejector_service.joint_ratio(LossKind.MODIFIED_LOG, task, lam)
        )
        grid = mask_lattice_grid(joint.array) if tau_grid is None else _check_grid(tau_grid)
        scale = math.exp(joint.log_normalizer - marginal.log_normalizer)
        bhatta_scores = rejector_service.divergence_scores(divergence_joint, task)

        rows = []
        for tau in grid.tolist():
            tau_marginal = scale * tau
            joint_mask = rejector_service.threshold_reject(joint, tau)
            marginal_mask = rejector_service.threshold_reject(marginal, tau_marginal)
            kappa = rejector_service.kappa_for_tau(divergence_joint, tau, bhatta_scores)
            bhatta_mask = rejector_service.bhatta_rejector(task, lam, kappa)
            kl_mask = rejector_service.kl_rejector(task, lam, lam.value * kappa)
            rows.append(
                AgreementRow(
                    tau=tau,
                    tau_marginal=tau_marginal,
                    kappa=kappa,
                    both=int(np.count_nonzero(joint_mask & marginal_mask)),
                    only_marginal=int(np.count_nonzero(marginal_mask & ~joint_mask)),
                    only_joint=int(np.count_nonzero(joint_mask & ~marginal_mask)),
                    neither=int(np.count_nonzero(~joint_mask & ~marginal_mask)),
                    ratio_violations=int(np.count_nonzero(joint_mask & ~marginal_mask)),
                    divergence_violations=int(np.count_nonzero(bhatta_mask & ~kl_mask)),
                )
            )
        report = AgreementReport(temperature=lam.value, n_inputs=task.n_inputs, rows=tuple(rows))
        if report.violations:
            logger.warning("Rejector containment violated %d times", report.violations)
        return report


# Singleton instance
sweep_service = SweepService()
