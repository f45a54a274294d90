"""Finite-domain probability objects: tasks, posteriors, logits, combined outputs"""

import math
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from rejectlab.config import PROB_TOLERANCE, RENORMALIZE_THRESHOLD
from rejectlab.errors import InvalidInputError

REJECT_TOKEN = None


def readonly(values) -> np.ndarray:
    """Float64 copy that callers cannot mutate"""
    array = np.array(values, dtype=np.float64)
    array.setflags(write=False)
    return array


def check_simplex(weights, name: str = "probability vector") -> np.ndarray:
    """Validate a probability vector.

    Entries must be finite and nonnegative and sum to 1 within
    PROB_TOLERANCE. Sums off by more than RENORMALIZE_THRESHOLD are
    renormalized; closer sums are kept as given so that stored vectors
    survive a write/read cycle unchanged.
    """
    array = np.array(weights, dtype=np.float64)
    if array.ndim != 1 or array.size == 0:
        raise InvalidInputError(f"{name} must be a non-empty 1-d vector")
    if not np.all(np.isfinite(array)):
        raise InvalidInputError(f"{name} has non-finite entries")
    if np.any(array < 0):
        raise InvalidInputError(f"{name} has negative entries")
    total = math.fsum(array)
    if abs(total - 1.0) > PROB_TOLERANCE:
        raise InvalidInputError(f"{name} sums to {total!r}, not 1")
    if abs(total - 1.0) > RENORMALIZE_THRESHOLD:
        array = array / total
    return array


class FiniteDomain(BaseModel):
    """Input space X = {0..n_inputs-1}, label space Y = {0..n_labels-1}"""

    model_config = ConfigDict(frozen=True)

    n_inputs: int = Field(ge=1)
    n_labels: int = Field(ge=2)


class ProbVector(BaseModel):
    """A point on the probability simplex"""

    model_config = ConfigDict(frozen=True)

    weights: tuple[float, ...]

    @field_validator("weights")
    @classmethod
    def _on_simplex(cls, weights):
        return tuple(check_simplex(weights).tolist())

    @property
    def array(self) -> np.ndarray:
        return readonly(self.weights)

    def __len__(self) -> int:
        return len(self.weights)


class PosteriorField(BaseModel):
    """One probability vector over labels per input"""

    model_config = ConfigDict(frozen=True)

    rows: tuple[tuple[float, ...], ...]

    @field_validator("rows")
    @classmethod
    def _rows_on_simplex(cls, rows):
        if not rows:
            raise InvalidInputError("posterior field has no rows")
        widths = {len(row) for row in rows}
        if len(widths) != 1:
            raise InvalidInputError("posterior rows have different lengths")
        return tuple(
            tuple(check_simplex(row, name=f"posterior row {x}").tolist())
            for x, row in enumerate(rows)
        )

    @property
    def array(self) -> np.ndarray:
        return readonly(self.rows)

    def row(self, x: int) -> np.ndarray:
        return readonly(self.rows[x])


class Logits(BaseModel):
    """Model outputs h(x) in R^L for every input"""

    model_config = ConfigDict(frozen=True)

    values: tuple[tuple[float, ...], ...]

    @field_validator("values")
    @classmethod
    def _finite_matrix(cls, values):
        if not values:
            raise InvalidInputError("logits have no rows")
        if len({len(row) for row in values}) != 1:
            raise InvalidInputError("logit rows have different lengths")
        if not all(math.isfinite(v) for row in values for v in row):
            raise InvalidInputError("logits must be finite")
        return values

    @property
    def array(self) -> np.ndarray:
        return readonly(self.values)


class FiniteTask(BaseModel):
    """Ground-truth P(x, y) = P_x(x) * pi*_y(x) together with a model's logits"""

    model_config = ConfigDict(frozen=True)

    domain: FiniteDomain
    marginal: ProbVector
    bayes_posterior: PosteriorField
    logits: Logits

    @model_validator(mode="after")
    def _consistent(self):
        n_inputs, n_labels = self.domain.n_inputs, self.domain.n_labels
        if len(self.marginal) != n_inputs:
            raise InvalidInputError("marginal length differs from n_inputs")
        if len(self.bayes_posterior.rows) != n_inputs or len(self.bayes_posterior.rows[0]) != n_labels:
            raise InvalidInputError("bayes_posterior shape differs from (n_inputs, n_labels)")
        if len(self.logits.values) != n_inputs or len(self.logits.values[0]) != n_labels:
            raise InvalidInputError("logits shape differs from (n_inputs, n_labels)")
        # density ratios against P_x are undefined on zero-mass inputs
        if min(self.marginal.weights) <= 0.0:
            raise InvalidInputError("marginal must be strictly positive on every input")
        total = math.fsum((self.marginal.array[:, None] * self.bayes_posterior.array).ravel())
        if abs(total - 1.0) > PROB_TOLERANCE:
            raise InvalidInputError(f"joint distribution sums to {total!r}")
        return self

    @classmethod
    def from_arrays(cls, marginal, bayes_posterior, logits) -> "FiniteTask":
        bayes_posterior = np.asarray(bayes_posterior, dtype=np.float64)
        logits = np.asarray(logits, dtype=np.float64)
        if bayes_posterior.ndim != 2 or logits.ndim != 2:
            raise InvalidInputError("bayes_posterior and logits must be 2-d")
        return cls(
            domain=FiniteDomain(n_inputs=bayes_posterior.shape[0], n_labels=bayes_posterior.shape[1]),
            marginal=ProbVector(weights=tuple(np.asarray(marginal, dtype=np.float64).tolist())),
            bayes_posterior=PosteriorField(rows=tuple(map(tuple, bayes_posterior.tolist()))),
            logits=Logits(values=tuple(map(tuple, logits.tolist()))),
        )

    @property
    def n_inputs(self) -> int:
        return self.domain.n_inputs

    @property
    def n_labels(self) -> int:
        return self.domain.n_labels

    @property
    def joint(self) -> np.ndarray:
        """P(x, y) as an n_inputs x n_labels array"""
        return readonly(self.marginal.array[:, None] * self.bayes_posterior.array)


class CombinedOutput(BaseModel):
    """Per input: a predicted label, or REJECT_TOKEN (None) when abstaining"""

    model_config = ConfigDict(frozen=True)

    labels: tuple[Optional[int], ...]

    @property
    def rejected(self) -> np.ndarray:
        return np.array([label is REJECT_TOKEN for label in self.labels], dtype=bool)

    @property
    def accepted(self) -> np.ndarray:
        return ~self.rejected
