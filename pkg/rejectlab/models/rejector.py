"""Loss kinds, rejection parameters and density-ratio rejectors"""

import math
from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from rejectlab.errors import InvalidParameterError
from rejectlab.models.task import readonly


class LossKind(str, Enum):
    ZERO_ONE = "zero_one"
    LOG = "log_loss"
    MODIFIED_LOG = "modified_log_loss"

    @classmethod
    def from_flag(cls, flag: str) -> "LossKind":
        """Parse the CLI spelling: zero-one | log | modified-log"""
        try:
            return _LOSS_FLAGS[flag]
        except KeyError:
            raise InvalidParameterError(
                f"unknown loss {flag!r}; expected one of {', '.join(_LOSS_FLAGS)}"
            ) from None


_LOSS_FLAGS = {
    "zero-one": LossKind.ZERO_ONE,
    "log": LossKind.LOG,
    "modified-log": LossKind.MODIFIED_LOG,
}


class RejectorKind(str, Enum):
    MARGINAL = "marginal"
    JOINT = "joint"


class ThresholdScale(str, Enum):
    RATIO = "ratio"  # tau, compared against density ratios
    DIVERGENCE = "divergence"  # kappa, compared against divergences


class Skew(BaseModel):
    """Skew beta of a Bhattacharyya coefficient, strictly inside (0, 1)"""

    model_config = ConfigDict(frozen=True)

    beta: float = Field(gt=0.0, lt=1.0)


class Temperature(BaseModel):
    """Weight lambda of the dissimilarity term in the ideal-distribution objectives"""

    model_config = ConfigDict(frozen=True)

    value: float = Field(gt=0.0, allow_inf_nan=False)

    @property
    def above_one(self) -> bool:
        """Whether 1 - 1/lambda is a valid skew"""
        return self.value > 1.0

    def bhattacharyya_skew(self) -> Skew:
        """beta = 1 - 1/lambda, put on the Bayes posterior"""
        if not self.above_one:
            raise InvalidParameterError(f"lambda must exceed 1 for a valid skew, got {self.value}")
        return Skew(beta=1.0 - 1.0 / self.value)

    def coefficient_skew(self) -> Skew:
        """beta = 1/lambda, put on the model posterior"""
        if not self.above_one:
            raise InvalidParameterError(f"lambda must exceed 1 for a valid skew, got {self.value}")
        return Skew(beta=1.0 / self.value)


class RejectionCost(BaseModel):
    """Price c paid per unit of rejected mass"""

    model_config = ConfigDict(frozen=True)

    value: float = Field(ge=0.0, allow_inf_nan=False)


class Threshold(BaseModel):
    """A ratio-scale tau (>= 0) or a divergence-scale kappa (any real, +inf allowed)"""

    model_config = ConfigDict(frozen=True)

    value: float
    scale: ThresholdScale = ThresholdScale.RATIO

    @model_validator(mode="after")
    def _valid_for_scale(self):
        if math.isnan(self.value):
            raise InvalidParameterError("threshold is NaN")
        if self.scale is ThresholdScale.RATIO and not (0.0 <= self.value < math.inf):
            raise InvalidParameterError(f"ratio threshold must be finite and >= 0, got {self.value}")
        return self

    @classmethod
    def ratio(cls, tau: float) -> "Threshold":
        return cls(value=tau, scale=ThresholdScale.RATIO)

    @classmethod
    def divergence(cls, kappa: float) -> "Threshold":
        return cls(value=kappa, scale=ThresholdScale.DIVERGENCE)


class DensityRatioRejector(BaseModel):
    """Closed-form ideal density ratio alpha (marginal) or alpha_j (joint) over X.

    scores[x] = weights[x] / normalizer, where weights is exp(-risk/lambda)
    for the marginal kind and E_{pi*}[exp(-loss/lambda)] for the joint
    kind. The log-normalizer is kept alongside so threshold
    reparameterizations reuse the exact constant.
    """

    model_config = ConfigDict(frozen=True)

    kind: RejectorKind
    loss: LossKind
    temperature: float = Field(gt=0.0)
    scores: tuple[float, ...]
    weights: tuple[float, ...]
    # may underflow to 0; log_normalizer stays exact
    normalizer: float = Field(ge=0.0)
    log_normalizer: float

    @field_validator("scores", "weights")
    @classmethod
    def _nonnegative(cls, scores):
        if any(not (s >= 0.0 and math.isfinite(s)) for s in scores):
            raise InvalidParameterError("density ratio scores must be finite and nonnegative")
        return scores

    @property
    def array(self) -> np.ndarray:
        return readonly(self.scores)


class RatioRelationReport(BaseModel):
    """Outcome of comparing the marginal and joint ratios of one task.

    Slacks are margins by which each inequality holds (negative means
    violated): Z_j*alpha_j(x) - Z*alpha(x) minimized over x, 1 - Z/Z_j,
    and, over every rejection by the joint rejector at (Z/Z_j)*tau,
    tau - alpha(x).
    """

    model_config = ConfigDict(frozen=True)

    passed: bool
    weight_slack: float
    normalizer_slack: float
    rejector_slack: float
    rejector_violations: int
    n_thresholds: int

    @property
    def worst_slack(self) -> float:
        return min(self.weight_slack, self.normalizer_slack, self.rejector_slack)
