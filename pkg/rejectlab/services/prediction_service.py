"""Prediction layer: softmax posteriors, argmax labels, combined model with rejection"""

import numpy as np
from scipy.special import log_softmax
from scipy.special import softmax as scipy_softmax

from rejectlab.errors import InvalidInputError
from rejectlab.models.task import REJECT_TOKEN, CombinedOutput, FiniteTask, readonly


def as_mask(mask, n_inputs: int) -> np.ndarray:
    """Coerce a 0/1 vector over X to a boolean array, checking its length"""
    array = np.asarray(mask)
    if array.ndim != 1 or array.shape[0] != n_inputs:
        raise InvalidInputError(f"mask must have length {n_inputs}, got shape {array.shape}")
    if array.dtype != bool:
        if not np.all((array == 0) | (array == 1)):
            raise InvalidInputError("mask entries must be 0 or 1")
        array = array.astype(bool)
    return array


class PredictionService:
    """Service for turning logits into posteriors, labels and combined outputs"""

    def softmax(self, logits_row) -> np.ndarray:
        """pi_y proportional to exp(h_y); scipy subtracts the row max first"""
        row = np.asarray(logits_row, dtype=np.float64)
        if row.ndim != 1 or row.size == 0:
            raise InvalidInputError("softmax expects a non-empty 1-d vector")
        if not np.all(np.isfinite(row)):
            raise InvalidInputError("softmax input must be finite")
        return scipy_softmax(row)

    def model_posterior(self, task: FiniteTask) -> np.ndarray:
        """pi(x) for every input, as an n_inputs x n_labels array"""
        return readonly(scipy_softmax(task.logits.array, axis=1))

    def model_log_posterior(self, task: FiniteTask) -> np.ndarray:
        """log pi(x), finite even where pi(x) underflows to zero"""
        return readonly(log_softmax(task.logits.array, axis=1))

    def bayes_log_posterior(self, task: FiniteTask) -> np.ndarray:
        """log pi*(x), -inf on zero-mass labels"""
        with np.errstate(divide="ignore"):
            return readonly(np.log(task.bayes_posterior.array))

    def predict(self, posterior_row) -> int:
        """Argmax label; ties go to the lowest index"""
        row = np.asarray(posterior_row, dtype=np.float64)
        if row.ndim != 1 or row.size == 0 or not np.all(np.isfinite(row)):
            raise InvalidInputError("predict expects a finite non-empty 1-d vector")
        return int(np.argmax(row))

    def predictions(self, task: FiniteTask) -> np.ndarray:
        """predict(pi(x)) for every input"""
        return np.argmax(self.model_posterior(task), axis=1)

    def combine(self, task: FiniteTask, reject_mask) -> CombinedOutput:
        mask = as_mask(reject_mask, task.n_inputs)
        labels = self.predictions(task)
        return CombinedOutput(
            labels=tuple(REJECT_TOKEN if rejected else int(label) for label, rejected in zip(labels, mask))
        )


# Singleton instance
prediction_service = PredictionService()
