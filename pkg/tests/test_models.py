import math

import numpy as np
import pytest

from rejectlab.errors import InvalidParameterError
from rejectlab.models import (
    CombinedOutput,
    FiniteDomain,
    FiniteTask,
    ProbVector,
    Temperature,
    Threshold,
    ThresholdScale,
)


class TestProbVector:
    def test_accepts_simplex_point(self):
        assert ProbVector(weights=(0.25, 0.75)).array.tolist() == [0.25, 0.75]

    @pytest.mark.parametrize(
        "weights",
        [
            pytest.param((0.5, 0.6), id="sum above one"),
            pytest.param((-0.1, 1.1), id="negative entry"),
            pytest.param((math.nan, 1.0), id="nan"),
            pytest.param((), id="empty"),
        ],
    )
    def test_rejects_invalid_vectors(self, weights):
        with pytest.raises(ValueError):
            ProbVector(weights=weights)

    def test_small_drift_is_renormalized(self):
        vector = ProbVector(weights=(0.5, 0.5 + 1e-10))
        assert math.fsum(vector.weights) == pytest.approx(1.0, abs=1e-15)

    def test_arrays_are_read_only(self):
        with pytest.raises(ValueError):
            ProbVector(weights=(0.5, 0.5)).array[0] = 1.0


class TestFiniteTask:
    def test_from_arrays_shapes(self, random_task):
        assert random_task.n_inputs == 8
        assert random_task.n_labels == 3
        assert random_task.joint.shape == (8, 3)
        assert random_task.joint.sum() == pytest.approx(1.0)

    def test_single_label_domain_is_rejected(self):
        with pytest.raises(ValueError):
            FiniteDomain(n_inputs=2, n_labels=1)

    def test_zero_mass_input_is_rejected(self):
        with pytest.raises(ValueError):
            FiniteTask.from_arrays([1.0, 0.0], [[0.5, 0.5], [0.5, 0.5]], np.zeros((2, 2)))

    def test_shape_mismatch_is_rejected(self):
        with pytest.raises(ValueError):
            FiniteTask.from_arrays([0.5, 0.5], [[0.5, 0.5], [0.5, 0.5]], np.zeros((2, 3)))

    def test_non_finite_logits_are_rejected(self):
        with pytest.raises(ValueError):
            FiniteTask.from_arrays([1.0], [[0.5, 0.5]], [[math.inf, 0.0]])


class TestParameters:
    def test_temperature_skews(self):
        lam = Temperature(value=4.0)
        assert lam.bhattacharyya_skew().beta == pytest.approx(0.75)
        assert lam.coefficient_skew().beta == pytest.approx(0.25)

    @pytest.mark.parametrize("value", [0.5, 1.0])
    def test_skews_need_lambda_above_one(self, value):
        with pytest.raises(InvalidParameterError):
            Temperature(value=value).bhattacharyya_skew()

    def test_temperature_must_be_positive(self):
        with pytest.raises(ValueError):
            Temperature(value=0.0)

    def test_ratio_threshold_must_be_nonnegative(self):
        with pytest.raises(ValueError):
            Threshold.ratio(-0.5)

    def test_divergence_threshold_allows_negative_and_infinite(self):
        assert Threshold.divergence(-1.0).scale is ThresholdScale.DIVERGENCE
        assert Threshold.divergence(math.inf).value == math.inf

    def test_nan_threshold_is_rejected(self):
        with pytest.raises(ValueError):
            Threshold.divergence(math.nan)


def test_combined_output_masks():
    output = CombinedOutput(labels=(1, None, 0))
    assert output.rejected.tolist() == [False, True, False]
    assert output.accepted.tolist() == [True, False, True]
