"""Per-input divergences between the Bayes posterior and the model posterior"""

import numpy as np
from pydantic import BaseModel, ConfigDict

from rejectlab.models.task import readonly


class DivergenceProfile(BaseModel):
    """For each x: KL(pi* || pi), BC_beta(pi* || pi), B_beta(pi* || pi), R_beta(pi* || pi)"""

    model_config = ConfigDict(frozen=True)

    beta: float
    kl: tuple[float, ...]
    bhattacharyya_coeff: tuple[float, ...]
    bhattacharyya_div: tuple[float, ...]
    renyi: tuple[float, ...]

    def as_arrays(self) -> dict[str, np.ndarray]:
        return {
            name: readonly(getattr(self, name))
            for name in ("kl", "bhattacharyya_coeff", "bhattacharyya_div", "renyi")
        }
