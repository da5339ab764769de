"""
Image probes: output variability, bifurcation grids and PCA lattice grids.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np

from ..mazeworld import STEM_FRAMES, MazeDataset, PathLabel, lap_poses, render_frame
from ..models.config import LAP_FRAMES
from ..models.exceptions import AnalysisError
from ..nets import ModelBundle, encode, generate
from ..services.artifacts import image_grid, save_png, to_uint8
from .geometry import LatentTrajectory, PcaResult, pca
from .metrics import ENCODE_BATCH, predict_frames

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


@dataclass
class VariabilityProfile:
    """Per-frame output variability and its maxima around each junction."""

    values: np.ndarray                  # (n,)
    samples: int
    junction_maxima: List[Dict[str, float]] = field(default_factory=list)


def pixel_std(images: np.ndarray) -> np.ndarray:
    """Mean over pixels of the standard deviation across axis 0 (ddof 0)."""
    images = np.asarray(images, dtype=np.float64)
    return images.std(axis=0).reshape(images.shape[1], -1).mean(axis=1)


def junction_maxima(values: np.ndarray, junctions: List[int], window: int) -> List[Dict[str, float]]:
    """Largest value within ±``window`` frames of each junction."""
    rows = []
    overall = float(np.mean(values)) if values.size else float("nan")
    for j in junctions:
        lo, hi = max(0, j - window), min(len(values), j + window + 1)
        if lo >= hi:
            continue
        local = values[lo:hi]
        k = int(np.argmax(local))
        rows.append({'junction': int(j), 'frame': lo + k, 'value': float(local[k]),
                     'window_mean': float(local.mean()), 'overall_mean': overall})
    return rows


def variability_probe(bundle: ModelBundle, dataset: MazeDataset, samples: int = 10,
                      window: int = 5, seed: Optional[int] = None,
                      batch_size: int = ENCODE_BATCH) -> VariabilityProfile:
    """
    Output variability per input frame.

    For each frame, ``samples`` latent codes are drawn from the encoder's
    posterior and decoded; the per-pixel standard deviation across those
    images is averaged over pixels.

    Args:
        bundle: Trained bundle
        dataset: Input frames
        samples: Draws per frame
        window: Half-width of the junction windows whose maxima are reported
        seed: Noise seed (defaults to the bundle seed)
        batch_size: Frames per forward pass

    Raises:
        AnalysisError: If fewer than two samples are requested
    """
    if samples < 2:
        raise AnalysisError("Variability needs at least two samples per frame",
                            error_code="TOO_FEW_SAMPLES", context={"samples": samples})
    rng = np.random.default_rng(bundle.seed if seed is None else seed)
    n = len(dataset)
    values = np.empty(n)
    for start in range(0, n, batch_size):
        idx = list(range(start, min(n, start + batch_size)))
        z = encode(bundle, dataset.images(idx), mode="sample", rng=rng, samples=samples)
        z = z.reshape(samples, len(idx), -1)
        decoded = generate(bundle, z.reshape(samples * len(idx), -1))
        values[start:start + len(idx)] = pixel_std(decoded.reshape((samples, len(idx)) + decoded.shape[1:]))
    maxima = junction_maxima(values, dataset.junction_indices, window)
    logger.info("Variability probe finished", extra={'context': {
        'frames': n, 'samples': samples, 'junction_maxima': maxima}})
    return VariabilityProfile(values=values, samples=samples, junction_maxima=maxima)


@dataclass
class BifurcationDump:
    """Images around each junction: rows are target-left, target-right, generated."""

    junctions: List[int]
    frames: np.ndarray                  # (J, 2w+1) input frame indices
    tiles: np.ndarray                   # (J, 3, 2w+1, S, S, 3) uint8
    paths: List[Path] = field(default_factory=list)

    @property
    def image_count(self) -> int:
        return int(np.prod(self.tiles.shape[:3]))


def _lap_side(dataset: MazeDataset, lap: int) -> PathLabel:
    start = lap * LAP_FRAMES + STEM_FRAMES + 1
    if 0 <= start < len(dataset):
        return PathLabel(int(dataset.labels[start]))
    return PathLabel.LEFT


def target_frame(dataset: MazeDataset, frame: int, side: PathLabel) -> np.ndarray:
    """
    The view at ``frame`` had the agent taken ``side`` at that lap's junction.

    Frames beyond the dataset end continue into the next lap's stem.
    """
    lap, offset = divmod(int(frame), LAP_FRAMES)
    previous = _lap_side(dataset, lap - 1) if lap > 0 else PathLabel.LEFT
    if offset <= STEM_FRAMES and 0 <= frame < len(dataset):
        return dataset.frames[frame]
    position, heading = lap_poses(previous, side, np.array([offset]))
    return render_frame(position[0, 0], position[0, 1], heading[0], dataset.size)


def bifurcation_dump(bundle: ModelBundle, dataset: MazeDataset, window: int = 5,
                     out_dir: Optional[PathLike] = None) -> BifurcationDump:
    """
    Targets for both sides and the generated prediction around each junction.

    Input frames t run over junction ± ``window`` (clipped to the dataset);
    the target rows show the frame t+τ on the left and on the right side.
    With ``out_dir`` one PNG grid per junction is written.
    """
    if window < 0:
        raise AnalysisError("Bifurcation window must be non-negative", error_code="BAD_ARGUMENT",
                            context={"window": window})
    junctions = list(dataset.junction_indices)
    n, size = len(dataset), dataset.size
    frames = np.array([[min(max(j + d, 0), n - 1) for d in range(-window, window + 1)]
                       for j in junctions], dtype=np.int64).reshape(len(junctions), 2 * window + 1)
    tiles = np.empty((len(junctions), 3, 2 * window + 1, size, size, 3), dtype=np.uint8)
    paths: List[Path] = []
    for row, j in enumerate(junctions):
        inputs = frames[row]
        generated = to_uint8(predict_frames(bundle, dataset, inputs))
        for col, t in enumerate(inputs):
            tiles[row, 0, col] = target_frame(dataset, int(t) + bundle.tau, PathLabel.LEFT)
            tiles[row, 1, col] = target_frame(dataset, int(t) + bundle.tau, PathLabel.RIGHT)
        tiles[row, 2] = generated
        if out_dir is not None:
            paths.append(save_png(image_grid(tiles[row]), Path(out_dir) / f"bifurcation_j{j:04d}.png"))
    return BifurcationDump(junctions=junctions, frames=frames, tiles=tiles, paths=paths)


@dataclass
class PcaGrid:
    """Images generated from a lattice on the first two principal axes."""

    coords: np.ndarray                  # (n, n, 2)
    z: np.ndarray                       # (n, n, d_z)
    tiles: np.ndarray                   # (n, n, S, S, 3) uint8
    path: Optional[Path] = None


def pca_lattice(result: PcaResult, n: int) -> np.ndarray:
    """
    (n, n, 2) coordinates spanning the projection's range; rows run from the
    largest second-axis value down, columns along the first axis. ``n = 1``
    gives the centroid.
    """
    if n < 1:
        raise AnalysisError("Grid size must be positive", error_code="BAD_ARGUMENT",
                            context={"n": n})
    if n == 1:
        return np.zeros((1, 1, 2))
    lo, hi = result.projection.min(axis=0), result.projection.max(axis=0)
    first = np.linspace(lo[0], hi[0], n)
    second = np.linspace(hi[1], lo[1], n)
    grid = np.empty((n, n, 2))
    grid[..., 0] = first[None, :]
    grid[..., 1] = second[:, None]
    return grid


def pca_grid_dump(bundle: ModelBundle, trajectory: Union[LatentTrajectory, np.ndarray],
                  n: int = 10, result: Optional[PcaResult] = None,
                  out_path: Optional[PathLike] = None) -> PcaGrid:
    """Decode an n×n lattice of the trajectory's PCA plane; other axes stay at the mean."""
    result = result or pca(trajectory)
    coords = pca_lattice(result, n)
    z = result.inverse(coords.reshape(-1, 2)).astype(np.float32)
    images = generate(bundle, z)
    tiles = to_uint8(images).reshape((n, n) + images.shape[2:] + (3,))
    path = save_png(image_grid(tiles), out_path) if out_path is not None else None
    return PcaGrid(coords=coords, z=z.reshape(n, n, -1), tiles=tiles, path=path)
