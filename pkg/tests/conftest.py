import math

import numpy as np
import pytest

from rejectlab.models import FiniteTask, TaskGenSpec
from rejectlab.services.task_service import task_service


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def make_task():
    def _make(n_inputs=6, n_labels=3, seed=0, noise=1.0, concentration=1.0):
        spec = TaskGenSpec(
            n_inputs=n_inputs,
            n_labels=n_labels,
            marginal_concentration=1.0,
            posterior_concentration=concentration,
            model_noise=noise,
            seed=seed,
        )
        return task_service.generate_task(spec)

    return _make


@pytest.fixture
def random_task(make_task):
    return make_task(n_inputs=8, n_labels=3, seed=11)


@pytest.fixture
def small_task(make_task):
    return make_task(n_inputs=3, n_labels=2, seed=5)


@pytest.fixture
def perfect_task(make_task):
    """The model posterior reproduces the Bayes posterior"""
    return make_task(n_inputs=5, n_labels=3, seed=2, noise=0.0)


@pytest.fixture
def uniform_model_task(rng):
    """Uniform model posterior: the log-loss is log L for every (x, y)"""
    n_inputs, n_labels = 5, 3
    marginal = rng.dirichlet(np.ones(n_inputs))
    bayes = rng.dirichlet(np.ones(n_labels), size=n_inputs)
    return FiniteTask.from_arrays(marginal, bayes, np.zeros((n_inputs, n_labels)))


@pytest.fixture
def two_label_task():
    """pi* = [0.7, 0.3] and pi = [0.6, 0.4] at a single input"""
    return FiniteTask.from_arrays([1.0], [[0.7, 0.3]], [[math.log(0.6), math.log(0.4)]])
