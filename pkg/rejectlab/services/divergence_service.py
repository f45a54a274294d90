"""KL, skewed Bhattacharyya and Renyi divergences between finite distributions.

Argument order is fixed everywhere: the skew beta (or Renyi order alpha)
sits on the FIRST argument, BC_beta(p || q) = sum_i p_i^beta q_i^(1-beta).
All logarithms are natural, so divergences are in nats.
"""

import math

import numpy as np
from scipy.special import kl_div, logsumexp

from rejectlab.errors import InvalidInputError, InvalidParameterError
from rejectlab.models.divergence import DivergenceProfile
from rejectlab.models.rejector import Skew
from rejectlab.models.task import FiniteTask, check_simplex, readonly
from rejectlab.services.prediction_service import prediction_service


def _pair(p, q):
    p = check_simplex(p, name="p")
    q = check_simplex(q, name="q")
    if p.shape != q.shape:
        raise InvalidInputError(f"length mismatch: {p.size} vs {q.size}")
    return p, q


def _rows(p_rows, q_rows):
    p_rows = np.asarray(p_rows, dtype=np.float64)
    q_rows = np.asarray(q_rows, dtype=np.float64)
    if p_rows.shape != q_rows.shape or p_rows.ndim != 2:
        raise InvalidInputError(f"row shapes differ: {p_rows.shape} vs {q_rows.shape}")
    return p_rows, q_rows


def _skew_value(beta) -> float:
    return beta.beta if isinstance(beta, Skew) else Skew(beta=beta).beta


def _power_sum(beta: float, p: np.ndarray, q: np.ndarray) -> np.ndarray:
    # 0^beta = 0 for beta > 0, so a zero on either side kills the term
    return (np.power(p, beta) * np.power(q, 1.0 - beta)).sum(axis=-1)


class DivergenceService:
    """Service for divergences on the simplex"""

    def kl(self, p, q) -> float:
        """sum_i p_i log(p_i / q_i); +inf when p puts mass where q has none"""
        p, q = _pair(p, q)
        # kl_div adds q - p per term: nonnegative elementwise, same sum on the simplex
        return float(kl_div(p, q).sum())

    def kl_rows(self, p_rows, q_rows) -> np.ndarray:
        p_rows, q_rows = _rows(p_rows, q_rows)
        return readonly(kl_div(p_rows, q_rows).sum(axis=1))

    def bhattacharyya_coeff(self, beta, p, q) -> float:
        p, q = _pair(p, q)
        # Hoelder bounds the coefficient by 1; clip the rounding above it
        return float(min(_power_sum(_skew_value(beta), p, q), 1.0))

    def bhattacharyya_coeff_rows(self, beta, p_rows, q_rows) -> np.ndarray:
        p_rows, q_rows = _rows(p_rows, q_rows)
        return readonly(np.minimum(_power_sum(_skew_value(beta), p_rows, q_rows), 1.0))

    def bhattacharyya_div(self, beta, p, q) -> float:
        """-log BC_beta(p || q); +inf on disjoint supports"""
        coeff = self.bhattacharyya_coeff(beta, p, q)
        return math.inf if coeff == 0.0 else -math.log(coeff)

    def bhattacharyya_div_rows(self, beta, p_rows, q_rows) -> np.ndarray:
        coeffs = self.bhattacharyya_coeff_rows(beta, p_rows, q_rows)
        with np.errstate(divide="ignore"):
            return readonly(-np.log(coeffs))

    def kl_log_rows(self, p_rows, log_p_rows, log_q_rows) -> np.ndarray:
        """Row-wise KL from log-probabilities, clamped at 0"""
        p_rows = np.asarray(p_rows, dtype=np.float64)
        log_p_rows, log_q_rows = _rows(log_p_rows, log_q_rows)
        support = p_rows > 0.0
        with np.errstate(invalid="ignore"):
            gaps = np.where(support, log_p_rows - log_q_rows, 0.0)
        return readonly(np.maximum((p_rows * gaps).sum(axis=1), 0.0))

    def bhattacharyya_div_log_rows(self, beta, log_p_rows, log_q_rows) -> np.ndarray:
        """-log sum_i exp(beta log p_i + (1 - beta) log q_i), clamped at 0"""
        beta = _skew_value(beta)
        log_p_rows, log_q_rows = _rows(log_p_rows, log_q_rows)
        exponents = beta * log_p_rows + (1.0 - beta) * log_q_rows
        with np.errstate(divide="ignore"):
            return readonly(np.maximum(-logsumexp(exponents, axis=1), 0.0))

    def task_kl(self, task: FiniteTask) -> np.ndarray:
        """KL(pi*(x) || pi(x)) at every input, computed from log-posteriors"""
        return self.kl_log_rows(
            task.bayes_posterior.array,
            prediction_service.bayes_log_posterior(task),
            prediction_service.model_log_posterior(task),
        )

    def task_bhattacharyya_div(self, task: FiniteTask, beta) -> np.ndarray:
        """B_beta(pi*(x) || pi(x)) at every input, computed from log-posteriors"""
        return self.bhattacharyya_div_log_rows(
            beta,
            prediction_service.bayes_log_posterior(task),
            prediction_service.model_log_posterior(task),
        )

    def renyi(self, alpha: float, p, q) -> float:
        """(alpha - 1)^-1 log sum_i p_i^alpha q_i^(1-alpha), for alpha in (0, 1)"""
        if not 0.0 < alpha < 1.0:
            raise InvalidParameterError(f"renyi order must lie in (0, 1), got {alpha}")
        p, q = _pair(p, q)
        total = min(float(_power_sum(alpha, p, q)), 1.0)
        if total == 0.0:
            return math.inf
        return math.log(total) / (alpha - 1.0)

    def renyi_rows(self, alpha: float, p_rows, q_rows) -> np.ndarray:
        if not 0.0 < alpha < 1.0:
            raise InvalidParameterError(f"renyi order must lie in (0, 1), got {alpha}")
        p_rows, q_rows = _rows(p_rows, q_rows)
        totals = np.minimum(_power_sum(alpha, p_rows, q_rows), 1.0)
        with np.errstate(divide="ignore"):
            return readonly(np.log(totals) / (alpha - 1.0))

    def profile(self, task: FiniteTask, beta) -> DivergenceProfile:
        """Divergences from pi*(x) to pi(x) at every input"""
        beta = _skew_value(beta)
        bayes = task.bayes_posterior.array
        model = prediction_service.model_posterior(task)
        return DivergenceProfile(
            beta=beta,
            kl=tuple(self.task_kl(task).tolist()),
            bhattacharyya_coeff=tuple(self.bhattacharyya_coeff_rows(beta, bayes, model).tolist()),
            bhattacharyya_div=tuple(self.task_bhattacharyya_div(task, beta).tolist()),
            renyi=tuple(self.renyi_rows(beta, bayes, model).tolist()),
        )


# Singleton instance
divergence_service = DivergenceService()
