"""Task generation specs, sweep tables, agreement and verification reports"""

from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from rejectlab.config import (
    DEFAULT_MARGINAL_CONCENTRATION,
    DEFAULT_MODEL_NOISE,
    DEFAULT_N_INPUTS,
    DEFAULT_N_LABELS,
    DEFAULT_POSTERIOR_CONCENTRATION,
)
from rejectlab.errors import InvalidInputError


class TaskGenSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    n_inputs: int = Field(default=DEFAULT_N_INPUTS, ge=1)
    n_labels: int = Field(default=DEFAULT_N_LABELS, ge=2)
    marginal_concentration: float = Field(default=DEFAULT_MARGINAL_CONCENTRATION, gt=0.0)
    posterior_concentration: float = Field(default=DEFAULT_POSTERIOR_CONCENTRATION, gt=0.0)
    model_noise: float = Field(default=DEFAULT_MODEL_NOISE, ge=0.0)
    seed: int = 0


class SweepRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    tau: float
    kappa: float
    rejection_rate: float = Field(ge=0.0, le=1.0)
    selective_risk: float
    n_rejected: int = Field(ge=0)
    mask_hash: str


class SweepResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    loss: str
    temperature: float
    rejector: str
    task_fingerprint: str
    rows: tuple[SweepRow, ...]

    @model_validator(mode="after")
    def _sorted(self):
        taus = [row.tau for row in self.rows]
        if taus != sorted(taus):
            raise InvalidInputError("sweep rows must be sorted by tau")
        return self


class RiskCoverageRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    coverage: float
    selective_risk: float
    selective_risk_normalized: float
    tau: float


class AgreementRow(BaseModel):
    """Mask overlap of the marginal and joint rejectors at one matched threshold"""

    model_config = ConfigDict(frozen=True)

    tau: float
    tau_marginal: float
    kappa: float
    both: int
    only_marginal: int
    only_joint: int
    neither: int
    ratio_violations: int
    divergence_violations: int


class AgreementReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    temperature: float
    n_inputs: int
    rows: tuple[AgreementRow, ...]

    @model_validator(mode="after")
    def _counts_cover_inputs(self):
        for row in self.rows:
            if row.both + row.only_marginal + row.only_joint + row.neither != self.n_inputs:
                raise InvalidInputError("agreement counts must sum to n_inputs")
        return self

    @property
    def violations(self) -> int:
        return sum(row.ratio_violations + row.divergence_violations for row in self.rows)


class CheckResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    passed: bool
    trials: int
    # smallest margin of the checked inequalities; identities report minus
    # their largest error, so only the pass flag says whether it held
    worst_slack: Optional[float] = None
    detail: str = ""


class VerificationReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    seed: int
    # None when every check ran its own default count
    n_trials: Optional[int] = None
    passed: bool
    checks: tuple[CheckResult, ...]
