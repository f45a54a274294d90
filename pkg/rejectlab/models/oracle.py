"""Brute-force oracle configuration and results"""

from pydantic import BaseModel, ConfigDict, Field

from rejectlab.config import ORACLE_MAX_ITERS, ORACLE_STEP_SIZE, ORACLE_TOLERANCE
from rejectlab.models.task import ProbVector


class OracleConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    max_iters: int = Field(default=ORACLE_MAX_ITERS, ge=1)
    # fraction of the natural step 1/lambda taken by each mirror step
    step_size: float = Field(default=ORACLE_STEP_SIZE, gt=0.0)
    tolerance: float = Field(default=ORACLE_TOLERANCE, gt=0.0)
    seed: int = 0


class OracleSolution(BaseModel):
    """Minimizer found by mirror descent over Delta(X) or Delta(X x Y) (row-major)"""

    model_config = ConfigDict(frozen=True)

    distribution: ProbVector
    objective_value: float
    closed_form_objective: float
    converged: bool
    iterations_used: int = Field(ge=0)
