"""Tests for the nearest-neighbour divergence estimate of the largest Lyapunov exponent."""

import numpy as np
import pytest

from cogmap.dreamer import LyapunovConfig, divergence_curve, lyapunov_rosenstein
from cogmap.dreamer.lyapunov import linear_region
from cogmap.models.exceptions import ClassificationError


def circle(period: int, points: int) -> np.ndarray:
    angles = 2 * np.pi * np.arange(points) / period
    return np.column_stack([np.cos(angles), np.sin(angles)])


def logistic(points: int, x0: float = 0.3) -> np.ndarray:
    x = np.empty(points)
    x[0] = x0
    for i in range(1, points):
        x[i] = 4.0 * x[i - 1] * (1.0 - x[i - 1])
    return x


@pytest.mark.unit
class TestLyapunovEstimate:

    def test_exponential_separation_along_an_orbit(self):
        j = np.arange(60)
        z = circle(15, 60) * (1.0 + 1e-4 * np.exp(0.1 * j))[:, None]
        estimate = lyapunov_rosenstein(z)
        assert estimate.exponent == pytest.approx(0.1, rel=1e-3)
        assert estimate.pairs == 40

    def test_exact_cycle_has_zero_exponent(self):
        z = np.tile(circle(15, 15), (4, 1))
        assert abs(lyapunov_rosenstein(z).exponent) < 0.05

    def test_contraction_is_negative(self):
        z = (0.9 ** np.arange(100))[:, None] * np.array([3.0, 4.0])
        estimate = lyapunov_rosenstein(z)
        assert estimate.exponent == pytest.approx(np.log(0.9), abs=1e-6)
        np.testing.assert_array_equal(estimate.fit_steps, [1, 2, 3])

    def test_logistic_map_is_chaotic(self):
        estimate = lyapunov_rosenstein(logistic(500))
        assert 0.4 < estimate.exponent < 1.0

    def test_needs_minimum_points(self):
        with pytest.raises(ClassificationError) as excinfo:
            lyapunov_rosenstein(np.zeros((49, 2)))
        assert excinfo.value.error_code == "RUN_TOO_SHORT"

    def test_non_finite(self):
        z = np.zeros((60, 2))
        z[10, 0] = np.nan
        with pytest.raises(ClassificationError) as excinfo:
            lyapunov_rosenstein(z)
        assert excinfo.value.error_code == "NON_FINITE"

    def test_exclusion_leaves_no_pairs(self):
        config = LyapunovConfig(exclusion=40)
        with pytest.raises(ClassificationError) as excinfo:
            divergence_curve(np.zeros((60, 2)), config)
        assert excinfo.value.error_code == "NO_NEIGHBOURS"

    def test_invalid_fit_range(self):
        with pytest.raises(ClassificationError) as excinfo:
            LyapunovConfig(fit_start=5, fit_end=6).validate()
        assert excinfo.value.error_code == "BAD_CONFIG"


@pytest.mark.unit
class TestLinearRegion:

    def test_stops_before_plateau(self):
        curve = np.concatenate([np.arange(6) * 1.0, np.full(15, 5.0)])
        np.testing.assert_array_equal(linear_region(curve, LyapunovConfig()), [1, 2, 3])

    def test_full_range_when_still_rising(self):
        curve = np.arange(21) * 0.01
        curve[20] = 10.0
        np.testing.assert_array_equal(linear_region(curve, LyapunovConfig()), np.arange(1, 11))
