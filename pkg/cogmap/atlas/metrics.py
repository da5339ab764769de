"""
Per-bundle latent-space metrics and their average over the analysis window.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from ..mazeworld import MazeDataset, segments
from ..models.exceptions import AnalysisError, DatasetError
from ..nets import ModelBundle, encode, predict
from .geometry import (
    LatentTrajectory, PcaResult, distance_correlation, distance_matrix, lr_dissimilarity, pca,
    smoothness,
)

logger = logging.getLogger(__name__)

ENCODE_BATCH = 64
SCALAR_METRICS = ("r_input", "r_target", "s_pca", "d_lr")


def encode_frames(bundle: ModelBundle, dataset: MazeDataset,
                  indices: Optional[Sequence[int]] = None,
                  batch_size: int = ENCODE_BATCH) -> LatentTrajectory:
    """Mean-mode latents of the selected frames (all frames by default)."""
    frames = list(range(len(dataset))) if indices is None else [int(i) for i in indices]
    chunks = [encode(bundle, dataset.images(frames[i:i + batch_size]), mode="mean")
              for i in range(0, len(frames), batch_size)]
    z = np.concatenate(chunks, axis=0) if chunks else np.zeros((0, bundle.zdim))
    return LatentTrajectory(z=z, source="encoded", frame_indices=frames)


def predict_frames(bundle: ModelBundle, dataset: MazeDataset, indices: Sequence[int],
                   batch_size: int = ENCODE_BATCH) -> np.ndarray:
    """Gen(Enc_mean(x(t))) for each index, as float images in [−1, 1]."""
    indices = [int(i) for i in indices]
    chunks = [predict(bundle, dataset.images(indices[i:i + batch_size]))
              for i in range(0, len(indices), batch_size)]
    return np.concatenate(chunks, axis=0)


@dataclass
class BundleMetrics:
    """Latent-space metrics of one bundle on one dataset."""

    iteration: int
    r_input: float
    r_target: float
    s_pca: float
    d_lr: float
    ratios: np.ndarray
    cumulative: np.ndarray
    projection: np.ndarray
    poses: np.ndarray
    labels: np.ndarray
    trajectory: Optional[LatentTrajectory] = None
    pca: Optional[PcaResult] = None

    def scalars(self) -> Dict[str, float]:
        return {name: float(getattr(self, name)) for name in SCALAR_METRICS}


def analyze_bundle(bundle: ModelBundle, dataset: MazeDataset) -> BundleMetrics:
    """
    Distance correlations, PCA, smoothness and left/right dissimilarity.

    Latents z(t) are encoded for every frame. Distance correlations use the
    frames t whose target x(t+τ) exists: r_input compares ‖z(t₁)−z(t₂)‖
    with ‖x(t₁)−x(t₂)‖, r_target with ‖x(t₁+τ)−x(t₂+τ)‖. When the dataset
    lacks a left or a right traversal, d_LR is NaN and a warning is logged.

    Raises:
        AnalysisError: If the latents are degenerate (constant or non-finite)
    """
    tau = bundle.tau
    n = len(dataset)
    if n <= tau + 2:
        raise AnalysisError(f"Dataset of {n} frames is too short for tau={tau}",
                            error_code="TOO_FEW_ITEMS", context={"frames": n, "tau": tau})
    trajectory = encode_frames(bundle, dataset)
    valid = n - tau

    d_latent = distance_matrix(trajectory.z[:valid])
    frames = dataset.frames.astype(np.float64) / 127.5 - 1.0
    r_input = distance_correlation(distance_matrix(frames[:valid]), d_latent)
    r_target = distance_correlation(distance_matrix(frames[tau:tau + valid]), d_latent)

    result = pca(trajectory)
    s_pca = smoothness(result.projection)
    try:
        d_lr = lr_dissimilarity(result.projection, segments(dataset))
    except DatasetError as e:
        logger.warning(f"d_LR undefined: {e.message}", extra={'context': e.context})
        d_lr = math.nan

    metrics = BundleMetrics(
        iteration=bundle.iteration, r_input=r_input, r_target=r_target, s_pca=s_pca, d_lr=d_lr,
        ratios=result.ratios, cumulative=result.cumulative, projection=result.projection,
        poses=dataset.poses.copy(), labels=dataset.labels.copy(),
        trajectory=trajectory, pca=result,
    )
    logger.debug("Analyzed bundle", extra={'context': {
        'variant': bundle.variant.value, 'tau': tau, 'seed': bundle.seed,
        'iteration': bundle.iteration, **metrics.scalars()}})
    return metrics


def in_window(iteration: int, final_iteration: int, window: float) -> bool:
    """Whether ``iteration`` lies in the last ``window`` fraction of training (boundary included)."""
    return final_iteration - iteration <= window * final_iteration


def _mean(values: Sequence[float]) -> float:
    finite = [v for v in values if not math.isnan(v)]
    return float(np.mean(finite)) if finite else math.nan


@dataclass
class MetricAverage:
    """Metrics averaged over the checkpoints of the analysis window."""

    iterations: List[int]
    r_input: float
    r_target: float
    s_pca: float
    d_lr: float
    cumulative: np.ndarray
    std: Dict[str, float] = field(default_factory=dict)

    def scalars(self) -> Dict[str, float]:
        return {name: float(getattr(self, name)) for name in SCALAR_METRICS}


def average_metrics(metrics: Sequence[BundleMetrics]) -> MetricAverage:
    """
    Mean of each scalar metric and of the cumulative PCA ratios.

    NaN values (undefined d_LR) are ignored unless every value is NaN.

    Raises:
        AnalysisError: If ``metrics`` is empty
    """
    if not metrics:
        raise AnalysisError("No checkpoints inside the analysis window", error_code="EMPTY_WINDOW")
    averaged = {name: _mean([getattr(m, name) for m in metrics]) for name in SCALAR_METRICS}
    std = {}
    for name in SCALAR_METRICS:
        finite = [getattr(m, name) for m in metrics if not math.isnan(getattr(m, name))]
        std[name] = float(np.std(finite)) if finite else math.nan
    return MetricAverage(
        iterations=[m.iteration for m in metrics],
        cumulative=np.mean(np.stack([m.cumulative for m in metrics]), axis=0),
        std=std,
        **averaged,
    )
