"""
Figure-8 maze layout and the agent's route through it.

The maze is a 9×9 grid of unit cells. Corridors run along rows 1 and 7 and
along columns 1, 4 and 7, which gives two square loops sharing the central
column (the stem). The agent walks up the stem, picks a side at the top
junction, runs around that loop and re-enters the stem from below.
"""

import logging
from dataclasses import dataclass
from enum import IntEnum
from typing import List, Tuple

import numpy as np

from ..models.config import LAP_FRAMES, SUPPORTED_SIZES
from ..models.exceptions import DatasetError

logger = logging.getLogger(__name__)

GRID_SIZE = 9
CORRIDOR_ROWS = (1, 7)
CORRIDOR_COLUMNS = (1, 4, 7)

SPEED = 0.075
STEM_LENGTH = 6.0
ARC_LENGTH = 12.0
STEM_FRAMES = int(round(STEM_LENGTH / SPEED))     # 80; the junction frame closes the stem
LOOK_BEHIND = 0.5
ENTRY_LENGTH = 3.0

_STEM = [(4.5, 1.5), (4.5, 7.5)]
_LEFT_ARC = [(1.5, 7.5), (1.5, 1.5), (4.5, 1.5)]
_RIGHT_ARC = [(7.5, 7.5), (7.5, 1.5), (4.5, 1.5)]


class PathLabel(IntEnum):
    """Which part of the figure-8 a frame belongs to."""
    STEM = 0
    LEFT = 1
    RIGHT = 2


def wall_map() -> np.ndarray:
    """Boolean (y, x) grid, True where a cell is solid."""
    walls = np.ones((GRID_SIZE, GRID_SIZE), dtype=bool)
    for row in CORRIDOR_ROWS:
        walls[row, 1:GRID_SIZE - 1] = False
    for col in CORRIDOR_COLUMNS:
        walls[1:GRID_SIZE - 1, col] = False
    return walls


@dataclass(frozen=True)
class MazeConfig:
    """Dataset generation settings."""

    size: int = 64
    frames: int = 480
    seed: int = 1
    junction_probability: float = 0.5
    fov_degrees: float = 60.0

    def validate(self) -> None:
        if self.size not in SUPPORTED_SIZES:
            raise DatasetError(
                f"Frame size {self.size} not supported. Supported: {', '.join(map(str, SUPPORTED_SIZES))}",
                error_code="BAD_SIZE",
                context={"size": self.size},
            )
        if self.frames < LAP_FRAMES:
            raise DatasetError(
                f"Frame count {self.frames} is shorter than one lap ({LAP_FRAMES} frames)",
                error_code="TOO_FEW_FRAMES",
                context={"frames": self.frames, "lap": LAP_FRAMES},
            )
        if not 0.0 <= self.junction_probability <= 1.0:
            raise DatasetError(
                f"Junction probability {self.junction_probability} outside [0, 1]",
                error_code="BAD_PROBABILITY",
                context={"junction_probability": self.junction_probability},
            )


@dataclass
class RoutePlan:
    """Poses and labels of every frame, before any rendering."""

    positions: np.ndarray        # (n, 2) float64
    headings: np.ndarray         # (n,) radians, counter-clockwise from +x
    labels: np.ndarray           # (n,) uint8 PathLabel values
    junction_indices: List[int]
    choices: List[PathLabel]     # side taken on each lap


def _lap_polyline(previous: PathLabel, side: PathLabel) -> np.ndarray:
    arc = _LEFT_ARC if side == PathLabel.LEFT else _RIGHT_ARC
    entry = _LEFT_ARC[1] if previous == PathLabel.LEFT else _RIGHT_ARC[1]
    # the last leg of the previous lap is prepended for the trailing heading point
    return np.array([entry] + _STEM + arc, dtype=np.float64)


def _points_along(polyline: np.ndarray, distance: np.ndarray) -> np.ndarray:
    seg = np.linalg.norm(np.diff(polyline, axis=0), axis=1)
    cumulative = np.concatenate([[0.0], np.cumsum(seg)])
    return np.stack([np.interp(distance, cumulative, polyline[:, 0]),
                     np.interp(distance, cumulative, polyline[:, 1])], axis=1)


def lap_poses(previous: PathLabel, side: PathLabel,
              offsets: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Positions (n, 2) and headings (n,) at frame ``offsets`` within a lap.

    Args:
        previous: Side taken on the lap before (only affects the first few frames)
        side: Side taken at this lap's junction
        offsets: Frame offsets in [0, LAP_FRAMES)
    """
    polyline = _lap_polyline(previous, side)
    travelled = np.asarray(offsets, dtype=np.float64) * SPEED + ENTRY_LENGTH
    here = _points_along(polyline, travelled)
    behind = _points_along(polyline, travelled - LOOK_BEHIND)
    delta = here - behind
    return here, np.arctan2(delta[:, 1], delta[:, 0])


def junction_indices_from_labels(labels: np.ndarray) -> List[int]:
    """Frames labelled stem whose successor is a left or right frame."""
    labels = np.asarray(labels)
    hits = (labels[:-1] == PathLabel.STEM) & (labels[1:] != PathLabel.STEM)
    return [int(i) for i in np.nonzero(hits)[0]]


def plan_route(config: MazeConfig) -> RoutePlan:
    """
    Walk the figure-8 at constant speed, choosing a side at every junction.

    Frame offsets 0..80 within a lap lie on the stem (offset 80 is the
    junction), offsets 81..239 on the chosen side loop. The heading points
    from a trailing point on the route to the current position, so frames up
    to the junction do not depend on the upcoming choice. The side taken
    before the first lap is drawn like every other choice.

    Raises:
        DatasetError: If the configuration is invalid
    """
    config.validate()
    rng = np.random.default_rng(config.seed)
    n_laps = -(-config.frames // LAP_FRAMES)
    sides = [PathLabel.LEFT if rng.random() < config.junction_probability else PathLabel.RIGHT
             for _ in range(n_laps + 1)]
    entry_side, choices = sides[0], sides[1:]

    offsets = np.arange(LAP_FRAMES)
    positions, headings, labels = [], [], []
    previous = entry_side
    for side in choices:
        here, heading = lap_poses(previous, side, offsets)
        previous = side
        positions.append(here)
        headings.append(heading)
        lap_labels = np.full(LAP_FRAMES, int(side), dtype=np.uint8)
        lap_labels[:STEM_FRAMES + 1] = PathLabel.STEM
        labels.append(lap_labels)

    n = config.frames
    label_array = np.concatenate(labels)[:n]
    plan = RoutePlan(
        positions=np.concatenate(positions)[:n],
        headings=np.concatenate(headings)[:n],
        labels=label_array,
        junction_indices=junction_indices_from_labels(label_array),
        choices=choices,
    )
    logger.debug("Planned maze route", extra={'context': {
        'frames': n, 'laps': n_laps, 'junctions': plan.junction_indices}})
    return plan
