"""
First-person software renderer for the figure-8 maze.

One ray per image column is marched through the wall grid (DDA); walls are
drawn with fisheye-corrected heights and the floor is cast row by row.
Both carry a checkerboard whose hue depends on world position, so distinct
poses give distinct images. Rendering is a pure function of pose and size.
"""

from typing import Tuple

import numpy as np

from .maze import GRID_SIZE, wall_map

CAMERA_HEIGHT = 0.5
WALL_CHECKS = 4          # checker cells per unit along walls
FLOOR_CHECKS = 2
CEILING_RGB = (0.86, 0.86, 0.9)
_MAX_STEPS = 4 * GRID_SIZE

_WALLS = wall_map()


def hsv_to_rgb(h: np.ndarray, s: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Vectorized HSV → RGB; all inputs in [0, 1], output stacked on the last axis."""
    h = np.mod(h, 1.0) * 6.0
    sector = np.floor(h).astype(np.int64) % 6
    f = h - np.floor(h)
    p = v * (1.0 - s)
    q = v * (1.0 - s * f)
    t = v * (1.0 - s * (1.0 - f))
    choices_r = [v, q, p, p, t, v]
    choices_g = [t, v, v, q, p, p]
    choices_b = [p, p, t, v, v, q]
    r = np.choose(sector, choices_r)
    g = np.choose(sector, choices_g)
    b = np.choose(sector, choices_b)
    return np.stack([r, g, b], axis=-1)


def _position_hue(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.mod((x + 2.0 * y) / (3.0 * GRID_SIZE), 1.0)


def _cast_columns(px: float, py: float, ray_x: np.ndarray,
                  ray_y: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Perpendicular wall distance, hit side (0 = x-facing) and hit point per column."""
    map_x = np.full(ray_x.shape, int(np.floor(px)), dtype=np.int64)
    map_y = np.full(ray_y.shape, int(np.floor(py)), dtype=np.int64)
    with np.errstate(divide="ignore"):
        delta_x = np.where(ray_x == 0, np.inf, np.abs(1.0 / np.where(ray_x == 0, 1.0, ray_x)))
        delta_y = np.where(ray_y == 0, np.inf, np.abs(1.0 / np.where(ray_y == 0, 1.0, ray_y)))
    step_x = np.where(ray_x < 0, -1, 1)
    step_y = np.where(ray_y < 0, -1, 1)
    side_x = np.where(ray_x < 0, (px - map_x) * delta_x, (map_x + 1.0 - px) * delta_x)
    side_y = np.where(ray_y < 0, (py - map_y) * delta_y, (map_y + 1.0 - py) * delta_y)

    side = np.zeros(ray_x.shape, dtype=np.int64)
    active = np.ones(ray_x.shape, dtype=bool)
    for _ in range(_MAX_STEPS):
        if not active.any():
            break
        along_x = active & (side_x < side_y)
        along_y = active & ~along_x
        side_x = np.where(along_x, side_x + delta_x, side_x)
        map_x = np.where(along_x, map_x + step_x, map_x)
        side_y = np.where(along_y, side_y + delta_y, side_y)
        map_y = np.where(along_y, map_y + step_y, map_y)
        side = np.where(along_x, 0, np.where(along_y, 1, side))
        inside = (map_x >= 0) & (map_x < GRID_SIZE) & (map_y >= 0) & (map_y < GRID_SIZE)
        solid = ~inside | _WALLS[np.clip(map_y, 0, GRID_SIZE - 1), np.clip(map_x, 0, GRID_SIZE - 1)]
        active &= ~solid

    distance = np.where(side == 0, side_x - delta_x, side_y - delta_y)
    distance = np.maximum(distance, 1e-6)
    hit_x = px + distance * ray_x
    hit_y = py + distance * ray_y
    return distance, side, hit_x, hit_y


def render_frame(x: float, y: float, heading: float, size: int,
                 fov_degrees: float = 60.0) -> np.ndarray:
    """
    Render the view from pose (x, y, heading) as a ``size``×``size``×3 uint8 image.

    Args:
        x: Camera position in maze units
        y: Camera position in maze units
        heading: View direction in radians, counter-clockwise from +x
        size: Image width and height in pixels
        fov_degrees: Horizontal field of view

    Returns:
        np.ndarray: (size, size, 3) RGB image
    """
    half_fov = np.tan(np.radians(fov_degrees) / 2.0)
    dir_x, dir_y = np.cos(heading), np.sin(heading)
    plane_x, plane_y = -dir_y * half_fov, dir_x * half_fov

    columns = np.arange(size, dtype=np.float64)
    camera = 1.0 - 2.0 * (columns + 0.5) / size          # +1 at the left edge
    ray_x = dir_x + plane_x * camera
    ray_y = dir_y + plane_y * camera
    distance, side, hit_x, hit_y = _cast_columns(x, y, ray_x, ray_y)

    focal = (size / 2.0) / half_fov
    rows = np.arange(size, dtype=np.float64)[:, None] + 0.5 - size / 2.0   # + is below horizon
    half_wall = CAMERA_HEIGHT * focal / distance[None, :]
    wall_rows = np.abs(rows) < np.where(rows >= 0, half_wall, (1.0 - CAMERA_HEIGHT) * focal / distance[None, :])
    floor_rows = (rows >= 0) & ~wall_rows

    # walls
    along = np.where(side == 0, hit_y, hit_x)[None, :]
    height = CAMERA_HEIGHT - rows * distance[None, :] / focal
    wall_check = (np.floor(along * WALL_CHECKS) + np.floor(height * WALL_CHECKS)) % 2
    wall_hue = np.broadcast_to(_position_hue(hit_x, hit_y)[None, :], wall_check.shape)
    wall_shade = np.where(side == 0, 1.0, 0.8)[None, :]
    wall_rgb = hsv_to_rgb(wall_hue, 0.55 + 0.3 * wall_check, (0.5 + 0.35 * wall_check) * wall_shade)

    # floor
    with np.errstate(divide="ignore"):
        row_distance = np.where(rows > 0, CAMERA_HEIGHT * focal / np.where(rows > 0, rows, 1.0), 0.0)
    floor_x = x + row_distance * ray_x[None, :]
    floor_y = y + row_distance * ray_y[None, :]
    floor_check = (np.floor(floor_x * FLOOR_CHECKS) + np.floor(floor_y * FLOOR_CHECKS)) % 2
    floor_hue = _position_hue(floor_x, floor_y) + 0.5
    floor_rgb = hsv_to_rgb(floor_hue, np.full(floor_check.shape, 0.35), 0.3 + 0.25 * floor_check)

    image = np.empty((size, size, 3), dtype=np.float64)
    image[:] = CEILING_RGB
    image[wall_rows] = wall_rgb[wall_rows]
    image[floor_rows] = floor_rgb[floor_rows]
    return np.clip(np.round(image * 255.0), 0, 255).astype(np.uint8)
