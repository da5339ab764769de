"""
Writers for the report tree: CSV tables and PNG image grids.
"""

import csv
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence, Union

import numpy as np
from PIL import Image

from ..models.exceptions import FormatError, ShapeError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def format_cell(value: Any) -> str:
    """Floats keep full precision so reports are byte-identical across identical runs."""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (np.integer,)):
        return str(int(value))
    return str(value)


def write_csv(path: PathLike, fieldnames: Sequence[str], rows: Iterable[Dict[str, Any]]) -> Path:
    """Write ``rows`` with a header row; missing fields are left empty."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=list(fieldnames), extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: format_cell(row[k]) for k in fieldnames if k in row})
    logger.debug("Wrote table", extra={'context': {'path': str(path)}})
    return path


def read_csv(path: PathLike) -> List[Dict[str, str]]:
    path = Path(path)
    if not path.is_file():
        raise FormatError(f"Table not found: {path}", error_code="NOT_FOUND",
                          context={"path": str(path)})
    with open(path, newline="") as handle:
        return list(csv.DictReader(handle))


def to_uint8(images: np.ndarray) -> np.ndarray:
    """(…, 3, S, S) floats in [−1, 1] → (…, S, S, 3) 8-bit RGB; the inverse of the dataset scaling."""
    images = np.asarray(images)
    if images.ndim < 3 or images.shape[-3] != 3:
        raise ShapeError(f"Expected channel-first RGB images, got shape {images.shape}",
                         error_code="SHAPE_MISMATCH", context={"input": images.shape})
    scaled = np.rint((np.clip(images, -1.0, 1.0) + 1.0) * 127.5)
    return np.moveaxis(scaled.astype(np.uint8), -3, -1)


def image_grid(tiles: np.ndarray, padding: int = 2, fill: int = 255) -> np.ndarray:
    """
    Tile a (rows, cols, S, S, 3) uint8 array into one image.

    Args:
        tiles: Images laid out by row and column
        padding: Pixels between neighbouring tiles
        fill: Value of the padding pixels

    Returns:
        np.ndarray: (rows·(S+p)−p, cols·(S+p)−p, 3) uint8 image
    """
    tiles = np.asarray(tiles, dtype=np.uint8)
    if tiles.ndim != 5 or tiles.shape[-1] != 3:
        raise ShapeError(f"Expected (rows, cols, H, W, 3) tiles, got {tiles.shape}",
                         error_code="SHAPE_MISMATCH", context={"input": tiles.shape})
    rows, cols, h, w, _ = tiles.shape
    grid = np.full((rows * (h + padding) - padding, cols * (w + padding) - padding, 3),
                   fill, dtype=np.uint8)
    for r in range(rows):
        for c in range(cols):
            top, left = r * (h + padding), c * (w + padding)
            grid[top:top + h, left:left + w] = tiles[r, c]
    return grid


def split_grid(grid: np.ndarray, rows: int, cols: int, padding: int = 2) -> np.ndarray:
    """Inverse of ``image_grid``."""
    h = (grid.shape[0] + padding) // rows - padding
    w = (grid.shape[1] + padding) // cols - padding
    tiles = np.empty((rows, cols, h, w, 3), dtype=np.uint8)
    for r in range(rows):
        for c in range(cols):
            top, left = r * (h + padding), c * (w + padding)
            tiles[r, c] = grid[top:top + h, left:left + w]
    return tiles


def save_png(image: np.ndarray, path: PathLike) -> Path:
    """Write an (H, W, 3) uint8 array as an 8-bit RGB PNG."""
    image = np.asarray(image)
    if image.ndim != 3 or image.shape[-1] != 3 or image.dtype != np.uint8:
        raise ShapeError(f"Expected an (H, W, 3) uint8 image, got {image.shape} {image.dtype}",
                         error_code="SHAPE_MISMATCH", context={"input": image.shape})
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(image).save(path, format="PNG")
    return path


def load_png(path: PathLike) -> np.ndarray:
    path = Path(path)
    if not path.is_file():
        raise FormatError(f"Image not found: {path}", error_code="NOT_FOUND",
                          context={"path": str(path)})
    with Image.open(path) as img:
        return np.asarray(img.convert("RGB"), dtype=np.uint8).copy()
