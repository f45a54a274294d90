"""Synthetic task generation"""

import logging

import numpy as np

from rejectlab.models.harness import TaskGenSpec
from rejectlab.models.task import FiniteTask

logger = logging.getLogger(__name__)


def _dirichlet(rng: np.random.Generator, concentration: float, size: int) -> np.ndarray:
    """Dirichlet(concentration * 1) draw as normalized Gamma(concentration, 1) variates.

    Draws are floored at the smallest normal double so every coordinate
    stays strictly positive.
    """
    draws = np.maximum(rng.gamma(concentration, 1.0, size=size), np.finfo(np.float64).tiny)
    return draws / draws.sum()


class TaskService:
    """Service for generating reproducible finite classification tasks"""

    def generate_task(self, spec: TaskGenSpec) -> FiniteTask:
        """P_x ~ Dir, pi*(x) ~ Dir, h(x) = log pi*(x) + noise * N(0, I); PCG64 seeded by spec.seed"""
        rng = np.random.default_rng(spec.seed)
        marginal = _dirichlet(rng, spec.marginal_concentration, spec.n_inputs)
        bayes = np.stack(
            [_dirichlet(rng, spec.posterior_concentration, spec.n_labels) for _ in range(spec.n_inputs)]
        )
        noise = rng.standard_normal((spec.n_inputs, spec.n_labels))
        logits = np.log(bayes) + spec.model_noise * noise
        task = FiniteTask.from_arrays(marginal, bayes, logits)
        logger.debug(
            "Generated task: %d inputs, %d labels, noise %.3g, seed %d",
            spec.n_inputs,
            spec.n_labels,
            spec.model_noise,
            spec.seed,
        )
        return task


# Singleton instance
task_service = TaskService()
