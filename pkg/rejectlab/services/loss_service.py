"""Loss functions and conditional risks"""

import math

import numpy as np
from scipy.special import entr, xlogy

from rejectlab.errors import InvalidInputError, LossDomainError
from rejectlab.models.rejector import LossKind
from rejectlab.models.task import FiniteTask, check_simplex, readonly
from rejectlab.services.divergence_service import divergence_service
from rejectlab.services.prediction_service import prediction_service


def _check_index(value: int, size: int, name: str):
    if not 0 <= value < size:
        raise InvalidInputError(f"{name} index {value} out of range [0, {size})")


class LossService:
    """Service for per-label losses and their expectations under the Bayes posterior"""

    def loss_matrix(self, kind: LossKind, task: FiniteTask) -> np.ndarray:
        """loss(kind, x, y) for every (x, y).

        Entries of the modified log-loss where pi*_y(x) = 0 are NaN; they
        carry zero Bayes mass and are skipped by every expectation.
        """
        kind = LossKind(kind)
        if kind is LossKind.ZERO_ONE:
            predicted = prediction_service.predictions(task)
            losses = (np.arange(task.n_labels)[None, :] != predicted[:, None]).astype(np.float64)
        elif kind is LossKind.LOG:
            losses = -prediction_service.model_log_posterior(task)
        else:
            bayes = task.bayes_posterior.array
            with np.errstate(invalid="ignore"):
                losses = prediction_service.bayes_log_posterior(task) - prediction_service.model_log_posterior(task)
            losses[bayes == 0.0] = np.nan
        return readonly(losses)

    def loss(self, kind: LossKind, task: FiniteTask, x: int, y: int) -> float:
        _check_index(x, task.n_inputs, "input")
        _check_index(y, task.n_labels, "label")
        if LossKind(kind) is LossKind.MODIFIED_LOG and task.bayes_posterior.rows[x][y] == 0.0:
            raise LossDomainError(f"modified log-loss undefined at x={x}, y={y}: zero Bayes mass")
        return float(self.loss_matrix(kind, task)[x, y])

    def conditional_risks(self, kind: LossKind, task: FiniteTask) -> np.ndarray:
        """sum_y pi*_y(x) * loss(kind, x, y) for every x; zero-mass labels contribute 0.

        The modified log-loss risk is KL(pi*(x) || pi(x)), which is never negative.
        """
        if LossKind(kind) is LossKind.MODIFIED_LOG:
            return divergence_service.task_kl(task)
        bayes = task.bayes_posterior.array
        losses = self.loss_matrix(kind, task)
        support = bayes > 0.0
        terms = np.where(support, bayes * np.where(support, losses, 0.0), 0.0)
        return readonly(terms.sum(axis=1))

    def conditional_risk(self, kind: LossKind, task: FiniteTask, x: int) -> float:
        _check_index(x, task.n_inputs, "input")
        return float(self.conditional_risks(kind, task)[x])

    def shannon_entropy(self, p) -> float:
        """-sum p log p in nats, with 0 log 0 = 0"""
        return float(math.fsum(entr(check_simplex(p))))

    def entropies(self, task: FiniteTask) -> np.ndarray:
        """H(pi*(x)) for every input"""
        return readonly(entr(task.bayes_posterior.array).sum(axis=1))

    def cross_entropy(self, p, q) -> float:
        """-sum p log q with 0 log 0 = 0; +inf where p > 0 and q = 0"""
        p, q = check_simplex(p), check_simplex(q)
        if p.shape != q.shape:
            raise InvalidInputError("cross_entropy arguments differ in length")
        return float(-math.fsum(xlogy(p, q)))


# Singleton instance
loss_service = LossService()
