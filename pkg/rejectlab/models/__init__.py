"""Pydantic models"""
from .harness import (
    AgreementReport,
    AgreementRow,
    CheckResult,
    RiskCoverageRow,
    SweepResult,
    SweepRow,
    TaskGenSpec,
    VerificationReport,
)
from .divergence import DivergenceProfile
from .oracle import OracleConfig, OracleSolution
from .rejector import (
    DensityRatioRejector,
    LossKind,
    RatioRelationReport,
    RejectionCost,
    RejectorKind,
    Skew,
    Temperature,
    Threshold,
    ThresholdScale,
)
from .task import (
    REJECT_TOKEN,
    CombinedOutput,
    FiniteDomain,
    FiniteTask,
    Logits,
    PosteriorField,
    ProbVector,
)

__all__ = [
    "AgreementReport",
    "AgreementRow",
    "CheckResult",
    "CombinedOutput",
    "DensityRatioRejector",
    "DivergenceProfile",
    "FiniteDomain",
    "FiniteTask",
    "Logits",
    "LossKind",
    "OracleConfig",
    "OracleSolution",
    "PosteriorField",
    "ProbVector",
    "REJECT_TOKEN",
    "RatioRelationReport",
    "RejectionCost",
    "RejectorKind",
    "RiskCoverageRow",
    "Skew",
    "SweepResult",
    "SweepRow",
    "TaskGenSpec",
    "Temperature",
    "Threshold",
    "ThresholdScale",
    "VerificationReport",
]
