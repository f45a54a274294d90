"""Brute-force solvers used to check the closed forms.

The ideal-distribution problems are solved by entropic mirror descent
(exponentiated gradient) on the simplex, started from the true
distribution; the rejection objective is minimized by enumerating
every mask.
"""

import logging
from typing import Optional

import numpy as np
from scipy.special import logsumexp, rel_entr

from rejectlab.config import (
    EXHAUSTIVE_MAX_INPUTS,
    ORACLE_MAX_INPUTS,
    ORACLE_MAX_JOINT_SIZE,
    ORACLE_MIN_LAMBDA,
)
from rejectlab.errors import OracleRefusedError
from rejectlab.models.oracle import OracleConfig, OracleSolution
from rejectlab.models.rejector import LossKind, RejectionCost, Temperature
from rejectlab.models.task import FiniteTask, ProbVector, readonly
from rejectlab.services.loss_service import loss_service
from rejectlab.services.rejector_service import rejector_service

logger = logging.getLogger(__name__)

# relative slack under which a rise in the objective counts as rounding
_RISE_SLACK = 1e-14
_MIN_STEP = 1e-12


def _regularized_objective(q: np.ndarray, costs: np.ndarray, prior: np.ndarray, lam: float) -> float:
    """sum q * cost + lam * KL(q || prior), skipping entries where q = 0"""
    held = q > 0.0
    linear = float(q[held] @ costs[held])
    return linear + lam * float(rel_entr(q, prior).sum())


def _check_lambda(lam) -> float:
    lam = lam if isinstance(lam, Temperature) else Temperature(value=lam)
    if lam.value <= ORACLE_MIN_LAMBDA:
        raise OracleRefusedError(f"lambda {lam.value} too small for the oracle (<= {ORACLE_MIN_LAMBDA})")
    return lam.value


class OracleService:
    """Service for independent numerical and exhaustive solutions"""

    def marginal_objective(self, kind: LossKind, task: FiniteTask, lam, q_x) -> float:
        """E_{Q_x}[risk] + lambda * KL(Q_x || P_x)"""
        lam = lam.value if isinstance(lam, Temperature) else float(lam)
        q_x = ProbVector(weights=tuple(np.asarray(q_x, dtype=np.float64).tolist())).array
        risks = loss_service.conditional_risks(kind, task)
        return _regularized_objective(q_x, risks, task.marginal.array, lam)

    def joint_objective(self, kind: LossKind, task: FiniteTask, lam, q) -> float:
        """E_Q[loss] + lambda * KL(Q || P) for Q over X x Y (row-major when flat)"""
        lam = lam.value if isinstance(lam, Temperature) else float(lam)
        q = ProbVector(weights=tuple(np.asarray(q, dtype=np.float64).ravel().tolist())).array
        losses = np.nan_to_num(loss_service.loss_matrix(kind, task).ravel(), nan=0.0, posinf=np.inf)
        return _regularized_objective(q, losses, task.joint.ravel(), lam)

    def closed_form_marginal(self, kind: LossKind, task: FiniteTask, lam) -> np.ndarray:
        """Q_x = P_x * alpha"""
        rejector = rejector_service.marginal_ratio(kind, task, lam)
        return readonly(task.marginal.array * rejector.array)

    def closed_form_joint(self, kind: LossKind, task: FiniteTask, lam) -> np.ndarray:
        """Q(x, y) = P(x, y) * exp(-loss(x, y)/lambda) / Z_j, as an n_inputs x n_labels array"""
        rejector = rejector_service.joint_ratio(kind, task, lam)
        lam = rejector.temperature
        joint = task.joint
        exponents = np.where(joint > 0.0, -loss_service.loss_matrix(kind, task) / lam, -np.inf)
        return readonly(joint * np.exp(exponents - rejector.log_normalizer))

    def _mirror_descent(self, costs, prior, lam: float, cfg: OracleConfig, closed_form) -> OracleSolution:
        costs = np.asarray(costs, dtype=np.float64)
        prior = np.asarray(prior, dtype=np.float64)
        # infinite cost or zero prior mass pins the coordinate at zero
        free = (prior > 0.0) & np.isfinite(costs)
        log_prior = np.log(prior[free])
        free_costs = costs[free]

        def expand(log_q):
            q = np.zeros_like(prior)
            q[free] = np.exp(log_q)
            return q

        log_q = log_prior - logsumexp(log_prior)
        q = expand(log_q)
        value = _regularized_objective(q, np.where(free, costs, 0.0), prior, lam)
        step = cfg.step_size
        converged = False
        iterations = 0
        while iterations < cfg.max_iters:
            iterations += 1
            gradient = free_costs + lam * (log_q - log_prior + 1.0)
            candidate = log_q - (step / lam) * gradient
            candidate -= logsumexp(candidate)
            q_next = expand(candidate)
            next_value = _regularized_objective(q_next, np.where(free, costs, 0.0), prior, lam)
            if next_value > value + _RISE_SLACK * max(1.0, abs(value)):
                step /= 2.0
                if step < _MIN_STEP:
                    break
                continue
            change = float(np.abs(q_next - q).sum())
            decrease = value - next_value
            log_q, q, value = candidate, q_next, next_value
            logger.debug("mirror step %d: objective %.17g, change %.3g", iterations, value, change)
            if decrease < cfg.tolerance and change < cfg.tolerance:
                converged = True
                break

        if not converged:
            logger.warning("Mirror descent stopped after %d iterations without converging", iterations)
        closed_value = _regularized_objective(
            np.asarray(closed_form).ravel(), np.where(free, costs, 0.0), prior, lam
        )
        return OracleSolution(
            distribution=ProbVector(weights=tuple(q.tolist())),
            objective_value=value,
            closed_form_objective=closed_value,
            converged=converged,
            iterations_used=iterations,
        )

    def solve_marginal_ideal(self, kind: LossKind, task: FiniteTask, lam, cfg: Optional[OracleConfig] = None) -> OracleSolution:
        """Minimize E_{Q_x}[risk] + lambda * KL(Q_x || P_x) over Delta(X)"""
        cfg = cfg or OracleConfig()
        lam_value = _check_lambda(lam)
        if task.n_inputs > ORACLE_MAX_INPUTS:
            raise OracleRefusedError(f"|X| = {task.n_inputs} exceeds the oracle limit {ORACLE_MAX_INPUTS}")
        return self._mirror_descent(
            loss_service.conditional_risks(kind, task),
            task.marginal.array,
            lam_value,
            cfg,
            self.closed_form_marginal(kind, task, lam_value),
        )

    def solve_joint_ideal(self, kind: LossKind, task: FiniteTask, lam, cfg: Optional[OracleConfig] = None) -> OracleSolution:
        """Minimize E_Q[loss] + lambda * KL(Q || P) over Delta(X x Y); the result is row-major"""
        cfg = cfg or OracleConfig()
        lam_value = _check_lambda(lam)
        size = task.n_inputs * task.n_labels
        if size > ORACLE_MAX_JOINT_SIZE:
            raise OracleRefusedError(f"|X|*L = {size} exceeds the oracle limit {ORACLE_MAX_JOINT_SIZE}")
        losses = np.nan_to_num(loss_service.loss_matrix(kind, task), nan=0.0, posinf=np.inf)
        return self._mirror_descent(
            losses.ravel(),
            task.joint.ravel(),
            lam_value,
            cfg,
            self.closed_form_joint(kind, task, lam_value),
        )

    def marginalize(self, task: FiniteTask, solution: OracleSolution) -> np.ndarray:
        """Q_j(x) / P_x(x) from a joint solution"""
        q = solution.distribution.array.reshape(task.n_inputs, task.n_labels)
        return readonly(q.sum(axis=1) / task.marginal.array)

    def exhaustive_rejector_search(self, kind: LossKind, task: FiniteTask, c) -> tuple[np.ndarray, float]:
        """Minimize the rejection objective over all 2^|X| masks"""
        n = task.n_inputs
        if n > EXHAUSTIVE_MAX_INPUTS:
            raise OracleRefusedError(f"|X| = {n} too large for exhaustive search (limit {EXHAUSTIVE_MAX_INPUTS})")
        cost = (c if isinstance(c, RejectionCost) else RejectionCost(value=c)).value
        masks = ((np.arange(2**n)[:, None] >> np.arange(n)[None, :]) & 1).astype(bool)
        risks = loss_service.conditional_risks(kind, task)
        values = np.where(masks, cost, risks[None, :]) @ task.marginal.array
        best = int(np.argmin(values))
        return masks[best].copy(), float(values[best])

    def chow_equivalence_scan(self, kind: LossKind, task: FiniteTask, lam, c) -> Optional[float]:
        """A tau whose marginal-ratio mask equals Chow's mask at cost c, or None"""
        target = rejector_service.chow_rule(kind, task, c)
        rejector = rejector_service.marginal_ratio(kind, task, lam)
        for tau in [0.0, *np.unique(rejector.array).tolist()]:
            if np.array_equal(rejector_service.threshold_reject(rejector, tau), target):
                return float(tau)
        logger.warning("No threshold reproduces Chow's rule at c=%r", c)
        return None


# Singleton instance
oracle_service = OracleService()
