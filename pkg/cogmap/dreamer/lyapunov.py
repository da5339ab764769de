"""
Largest Lyapunov exponent from a single trajectory (nearest-neighbour
divergence method).

Every point j is paired with its nearest neighbour k (Euclidean, directly on
the latent vectors) subject to |j − k| > ``exclusion``. The divergence
curve y(i) is the mean of ln ‖z(j+i) − z(k+i)‖ over all pairs, and the
exponent is the least-squares slope of y over its initial linear region.
"""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.spatial.distance import pdist, squareform

from ..models.exceptions import ClassificationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LyapunovConfig:
    exclusion: int = 10
    divergence_steps: int = 20
    fit_start: int = 1
    fit_end: int = 10
    plateau_margin: float = 1.0
    min_points: int = 50
    distance_floor: float = 1e-12

    def validate(self) -> None:
        problems = []
        if self.exclusion < 0:
            problems.append("exclusion")
        if self.divergence_steps < 1:
            problems.append("divergence_steps")
        if not 0 <= self.fit_start < self.fit_end <= self.divergence_steps:
            problems.append("fit range")
        if self.fit_end - self.fit_start < 2:
            problems.append("fit range (needs three points)")
        if self.plateau_margin <= 0 or self.distance_floor <= 0:
            problems.append("plateau_margin/distance_floor")
        if problems:
            raise ClassificationError(f"Invalid Lyapunov settings: {', '.join(problems)}",
                                      error_code="BAD_CONFIG", context={"fields": problems})


@dataclass
class LyapunovEstimate:
    exponent: float
    divergence: np.ndarray        # y(i), i = 0..divergence_steps
    fit_steps: np.ndarray         # the i values used by the fit
    pairs: int


def divergence_curve(z: np.ndarray, config: LyapunovConfig) -> Tuple[np.ndarray, int]:
    """
    Mean log distance of nearest-neighbour pairs after i = 0..H steps, and
    the number of pairs.

    Only indices whose whole divergence window lies inside the run take
    part, as references and as neighbours.

    Raises:
        ClassificationError: If no pair satisfies the exclusion window
    """
    horizon = config.divergence_steps
    usable = z.shape[0] - horizon
    if usable <= config.exclusion + 1:
        raise ClassificationError("Run too short for any neighbour pair",
                                  error_code="NO_NEIGHBOURS",
                                  context={"points": z.shape[0], "horizon": horizon,
                                           "exclusion": config.exclusion})
    base = z[:usable]
    dist = squareform(pdist(base, metric="euclidean"))
    gap = np.abs(np.arange(usable)[:, None] - np.arange(usable)[None, :])
    dist[gap <= config.exclusion] = np.inf
    neighbours = np.argmin(dist, axis=1)
    valid = np.isfinite(dist[np.arange(usable), neighbours])
    refs, neighbours = np.nonzero(valid)[0], neighbours[valid]
    if refs.size == 0:
        raise ClassificationError("No neighbour pairs outside the exclusion window",
                                  error_code="NO_NEIGHBOURS",
                                  context={"points": z.shape[0], "exclusion": config.exclusion})

    steps = np.arange(horizon + 1)
    diffs = z[refs[:, None] + steps[None, :]] - z[neighbours[:, None] + steps[None, :]]
    distances = np.maximum(np.linalg.norm(diffs, axis=2), config.distance_floor)
    return np.log(distances).mean(axis=0), int(refs.size)


def linear_region(curve: np.ndarray, config: LyapunovConfig) -> np.ndarray:
    """
    Steps fitted for the slope: ``fit_start..fit_end``, cut before the first
    step whose value comes within ``plateau_margin`` of the curve's maximum,
    but never fewer than three points.
    """
    steps = np.arange(config.fit_start, config.fit_end + 1)
    ceiling = curve.max() - config.plateau_margin
    near = np.nonzero(curve[steps] >= ceiling)[0]
    cut = int(near[0]) if near.size else steps.size
    return steps[:max(cut, 3)]


def lyapunov_rosenstein(z: np.ndarray, config: LyapunovConfig = LyapunovConfig()) -> LyapunovEstimate:
    """
    Largest Lyapunov exponent per step.

    Args:
        z: (n, d) trajectory; a 1-D series is treated as d = 1
        config: Neighbour exclusion, divergence horizon and fit range

    Returns:
        LyapunovEstimate: Exponent, divergence curve and the fitted steps

    Raises:
        ClassificationError: With fewer than ``min_points`` points, non-finite
            values or no valid neighbour pairs
    """
    config.validate()
    z = np.asarray(z, dtype=np.float64)
    if z.ndim == 1:
        z = z[:, None]
    if z.shape[0] < config.min_points:
        raise ClassificationError(
            f"Lyapunov estimation needs at least {config.min_points} points, got {z.shape[0]}",
            error_code="RUN_TOO_SHORT", context={"points": z.shape[0]})
    if not np.all(np.isfinite(z)):
        raise ClassificationError("Trajectory contains non-finite values", error_code="NON_FINITE")

    curve, pairs = divergence_curve(z, config)
    steps = linear_region(curve, config)
    slope = float(np.polyfit(steps.astype(np.float64), curve[steps], 1)[0])
    logger.debug("Lyapunov estimate", extra={'context': {
        'exponent': slope, 'fit_steps': steps.tolist(), 'points': z.shape[0]}})
    return LyapunovEstimate(exponent=slope, divergence=curve, fit_steps=steps, pairs=pairs)
