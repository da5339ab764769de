"""
Synthetic figure-8 maze: route planning, rendering and datasets.
"""

from .dataset import MazeDataset, PathSegments, generate, load, save, segments
from .maze import (
    STEM_FRAMES, MazeConfig, PathLabel, RoutePlan, lap_poses, plan_route, wall_map,
)
from .render import render_frame

__all__ = [
    "STEM_FRAMES",
    "MazeConfig",
    "MazeDataset",
    "PathLabel",
    "PathSegments",
    "RoutePlan",
    "generate",
    "lap_poses",
    "load",
    "plan_route",
    "render_frame",
    "save",
    "segments",
    "wall_map",
]
