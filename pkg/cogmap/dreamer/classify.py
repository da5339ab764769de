"""
Classification of closed-loop latent trajectories.

A run is a FixedPoint when its accumulated late movement is below a
threshold, otherwise a LimitCycle when its final latent recurs earlier in
the run, otherwise Chaotic when the largest Lyapunov exponent is clearly
positive. Everything else is Undetermined.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from ..models.exceptions import ClassificationError
from .lyapunov import LyapunovConfig, lyapunov_rosenstein

logger = logging.getLogger(__name__)


class TrajectoryType(Enum):
    FIXED_POINT = "FixedPoint"
    LIMIT_CYCLE = "LimitCycle"
    CHAOTIC = "Chaotic"
    UNDETERMINED = "Undetermined"

    @classmethod
    def parse(cls, name: str) -> "TrajectoryType":
        for member in cls:
            if member.value.lower() == str(name).strip().lower():
                return member
        raise ClassificationError(f"Unknown trajectory type '{name}'", error_code="BAD_LABEL",
                                  context={"label": name})


@dataclass(frozen=True)
class ClassifierConfig:
    """Thresholds and windows of the trajectory classifier."""

    fixed_point_threshold: float = 1e-5
    cycle_threshold: float = 1e-8
    tail_start: int = 175
    tail_end: int = 199
    cycle_start: int = 100
    lyapunov_margin: float = 1e-3
    lyapunov: LyapunovConfig = field(default_factory=LyapunovConfig)

    def validate(self) -> None:
        problems = []
        if self.fixed_point_threshold <= 0 or self.cycle_threshold <= 0:
            problems.append("thresholds must be positive")
        if not 0 <= self.tail_start <= self.tail_end:
            problems.append("tail window")
        if self.cycle_start < 0:
            problems.append("cycle_start")
        if self.lyapunov_margin < 0:
            problems.append("lyapunov_margin")
        if problems:
            raise ClassificationError(f"Invalid classifier settings: {', '.join(problems)}",
                                      error_code="BAD_CONFIG", context={"fields": problems})
        self.lyapunov.validate()

    @property
    def min_length(self) -> int:
        """Latents needed to evaluate the tail sum up to z[tail_end + 1]."""
        return self.tail_end + 2


@dataclass(frozen=True)
class Classification:
    label: TrajectoryType
    tail_movement: float
    recurrence: float                   # min squared distance to an earlier latent, NaN if none
    lyapunov: float = math.nan


def _latents(run) -> np.ndarray:
    z = getattr(run, "z", run)
    return np.asarray(z, dtype=np.float64)


def inspect_run(run, config: ClassifierConfig = ClassifierConfig()) -> Classification:
    """
    Label a run and keep the quantities behind the decision.

    Args:
        run: A ClosedLoopRun or an (n, d_z) latent array
        config: Thresholds and windows

    Returns:
        Classification: Label, tail movement, recurrence distance and λ
            (NaN when the exponent was not needed or could not be estimated)

    Raises:
        ClassificationError: If the run is shorter than the tail window
    """
    config.validate()
    z = _latents(run)
    if z.ndim == 1:
        z = z[:, None]
    if z.shape[0] < config.min_length:
        raise ClassificationError(
            f"Run of {z.shape[0]} latents is shorter than the tail window ({config.min_length})",
            error_code="RUN_TOO_SHORT",
            context={"points": z.shape[0], "tail_end": config.tail_end})
    # latents past the tail window do not take part
    z = z[:config.min_length]
    if not np.all(np.isfinite(z)):
        raise ClassificationError("Run contains non-finite latents", error_code="NON_FINITE")

    steps = np.diff(z[config.tail_start:config.tail_end + 2], axis=0)
    tail = float(np.sum(steps * steps))
    last = z[config.tail_end + 1]
    earlier = z[config.cycle_start:config.tail_end]
    recurrence = float(np.min(np.sum((earlier - last) ** 2, axis=1))) if len(earlier) else math.nan

    if tail < config.fixed_point_threshold:
        return Classification(TrajectoryType.FIXED_POINT, tail, recurrence)
    if not math.isnan(recurrence) and recurrence < config.cycle_threshold:
        return Classification(TrajectoryType.LIMIT_CYCLE, tail, recurrence)

    try:
        exponent = lyapunov_rosenstein(z, config.lyapunov).exponent
    except ClassificationError as e:
        logger.warning(f"Lyapunov estimate failed: {e.message}",
                       extra={'context': {'error_code': e.error_code, **e.context}})
        return Classification(TrajectoryType.UNDETERMINED, tail, recurrence)
    label = TrajectoryType.CHAOTIC if exponent > config.lyapunov_margin else TrajectoryType.UNDETERMINED
    return Classification(label, tail, recurrence, exponent)


def classify(run, config: ClassifierConfig = ClassifierConfig()) -> TrajectoryType:
    """Trajectory type of a closed-loop run."""
    return inspect_run(run, config).label


def classifier_config(fixed_point_threshold: float = 1e-5, cycle_threshold: float = 1e-8,
                      lyapunov_margin: float = 1e-3,
                      iterations: Optional[int] = None) -> ClassifierConfig:
    """
    Classifier settings; with ``iterations`` the tail window ends at the run's
    last step and keeps its 25-step width.
    """
    if iterations is None:
        return ClassifierConfig(fixed_point_threshold, cycle_threshold,
                                lyapunov_margin=lyapunov_margin)
    tail_end = iterations - 1
    return ClassifierConfig(fixed_point_threshold, cycle_threshold,
                            tail_start=tail_end - 24, tail_end=tail_end,
                            cycle_start=iterations // 2, lyapunov_margin=lyapunov_margin)
