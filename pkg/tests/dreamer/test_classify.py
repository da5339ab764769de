"""Tests for the trajectory classifier."""

import logging
import math

import numpy as np
import pytest

from cogmap.dreamer import (
    ClassifierConfig, LyapunovConfig, TrajectoryType, classifier_config, classify, inspect_run,
)
from cogmap.models.exceptions import ClassificationError


def cycle(period: int, points: int, radius: float = 10.0) -> np.ndarray:
    angles = 2 * np.pi * np.arange(period) / period
    base = radius * np.column_stack([np.cos(angles), np.sin(angles), np.zeros(period)])
    return np.tile(base, (points // period + 1, 1))[:points]


def drift(points: int) -> np.ndarray:
    return 0.01 * np.arange(points)[:, None] * np.array([1.0, 0.0])


def logistic_embedding(points: int, x0: float = 0.3) -> np.ndarray:
    x = np.empty(points + 1)
    x[0] = x0
    for i in range(1, points + 1):
        x[i] = 4.0 * x[i - 1] * (1.0 - x[i - 1])
    return np.column_stack([x[:-1], x[1:]])


@pytest.mark.unit
class TestClassify:

    def test_constant_run_is_fixed_point(self):
        result = inspect_run(np.ones((201, 3)))
        assert result.label is TrajectoryType.FIXED_POINT
        assert result.tail_movement == 0.0
        assert math.isnan(result.lyapunov)

    def test_exact_repetition_is_limit_cycle(self):
        result = inspect_run(cycle(7, 201))
        assert result.label is TrajectoryType.LIMIT_CYCLE
        assert result.recurrence == 0.0

    def test_logistic_map_is_chaotic(self):
        result = inspect_run(logistic_embedding(201))
        assert result.label is TrajectoryType.CHAOTIC
        assert result.lyapunov > 1e-3

    def test_steady_drift_is_undetermined(self):
        result = inspect_run(drift(201))
        assert result.label is TrajectoryType.UNDETERMINED
        assert abs(result.lyapunov) < 1e-3

    def test_failed_estimate_is_undetermined(self, caplog):
        config = ClassifierConfig(lyapunov=LyapunovConfig(min_points=500))
        with caplog.at_level(logging.WARNING, logger="cogmap"):
            result = inspect_run(drift(201), config)
        assert result.label is TrajectoryType.UNDETERMINED
        assert math.isnan(result.lyapunov)
        assert any("Lyapunov estimate failed" in r.getMessage() for r in caplog.records)

    def test_slow_settling_counts_as_fixed_point(self):
        z = np.ones((201, 2))
        z[:, 0] += 1e-4 * np.arange(201)
        assert classify(z) is TrajectoryType.FIXED_POINT

    def test_latents_after_the_window_are_ignored(self):
        settled = np.vstack([np.ones((201, 3)), drift(60) @ np.eye(2, 3) + 5.0])
        assert classify(settled) is TrajectoryType.FIXED_POINT
        looped = np.vstack([cycle(7, 201), np.linspace(20.0, 40.0, 150)[:, None] * np.ones(3)])
        result = inspect_run(looped)
        assert result.label is TrajectoryType.LIMIT_CYCLE
        assert result.recurrence == 0.0

    def test_run_too_short(self):
        with pytest.raises(ClassificationError) as excinfo:
            classify(np.ones((200, 3)))
        assert excinfo.value.error_code == "RUN_TOO_SHORT"

    def test_non_finite(self):
        z = np.ones((201, 3))
        z[5] = np.inf
        with pytest.raises(ClassificationError) as excinfo:
            classify(z)
        assert excinfo.value.error_code == "NON_FINITE"


@pytest.mark.unit
class TestClassifierConfig:

    def test_defaults(self):
        config = classifier_config()
        assert (config.tail_start, config.tail_end, config.cycle_start) == (175, 199, 100)
        assert config.min_length == 201

    def test_follows_iteration_count(self):
        config = classifier_config(iterations=300)
        assert (config.tail_start, config.tail_end, config.cycle_start) == (275, 299, 150)
        assert inspect_run(np.ones((301, 2)), config).label is TrajectoryType.FIXED_POINT

    def test_invalid_threshold(self):
        with pytest.raises(ClassificationError) as excinfo:
            inspect_run(np.ones((201, 2)), ClassifierConfig(fixed_point_threshold=-1.0))
        assert excinfo.value.error_code == "BAD_CONFIG"


@pytest.mark.unit
class TestTrajectoryType:

    @pytest.mark.parametrize("name", ["fixedpoint", "FixedPoint", "FIXEDPOINT"])
    def test_parse_ignores_case(self, name):
        assert TrajectoryType.parse(name) is TrajectoryType.FIXED_POINT

    def test_unknown_label(self):
        with pytest.raises(ClassificationError) as excinfo:
            TrajectoryType.parse("spiral")
        assert excinfo.value.error_code == "BAD_LABEL"
