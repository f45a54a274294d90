"""Per-run settings assembled from flags, config file and environment"""

from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from rejectlab.config import (
    DEFAULT_COST,
    DEFAULT_LAMBDA,
    DEFAULT_LOSS,
    DEFAULT_REJECTOR,
    DEFAULT_SEED,
    DEFAULT_TRIALS,
    DEFAULT_WORKERS,
)
from rejectlab.models.harness import TaskGenSpec

RejectorFlag = Literal["chow", "marginal", "joint", "bhatta", "kl"]
LossFlag = Literal["zero-one", "log", "modified-log"]


class RunSettings(BaseModel):
    model_config = ConfigDict(frozen=True, populate_by_name=True, extra="forbid")

    loss: LossFlag = DEFAULT_LOSS
    lambda_: float = Field(default=DEFAULT_LAMBDA, gt=0.0, alias="lambda")
    rejector: RejectorFlag = DEFAULT_REJECTOR
    cost: float = Field(default=DEFAULT_COST, ge=0.0)
    tau_grid: str = "auto"
    seed: int = DEFAULT_SEED
    out: Optional[Path] = None
    trials: Optional[int] = Field(default=DEFAULT_TRIALS, ge=0)
    workers: int = Field(default=DEFAULT_WORKERS, ge=1)
    task: TaskGenSpec = TaskGenSpec()
