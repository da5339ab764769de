"""
Geometry of latent trajectories: distance matrices, PCA, smoothness and
left/right dissimilarity.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Union

import numpy as np
from scipy.spatial.distance import pdist, squareform

from ..mazeworld import PathSegments
from ..models.exceptions import AnalysisError

logger = logging.getLogger(__name__)

SOURCES = ("encoded", "closed_loop")


@dataclass
class LatentTrajectory:
    """Ordered latent vectors z(t) and where they came from."""

    z: np.ndarray
    source: str = "encoded"
    frame_indices: List[int] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.z = np.asarray(self.z, dtype=np.float64)
        if self.z.ndim != 2:
            raise AnalysisError(f"Latent trajectory must be (n, d_z), got {self.z.shape}",
                                error_code="SHAPE_MISMATCH", context={"shape": self.z.shape})
        if self.source not in SOURCES:
            raise AnalysisError(f"Unknown trajectory source '{self.source}'",
                                error_code="BAD_SOURCE", context={"source": self.source})
        if not np.all(np.isfinite(self.z)):
            raise AnalysisError("Latent trajectory contains non-finite values",
                                error_code="NON_FINITE",
                                context={"rows": np.nonzero(~np.isfinite(self.z).all(axis=1))[0][:10].tolist()})
        if not self.frame_indices:
            self.frame_indices = list(range(self.z.shape[0]))
        elif len(self.frame_indices) != self.z.shape[0]:
            raise AnalysisError("Frame indices and latent vectors differ in length",
                                error_code="SHAPE_MISMATCH",
                                context={"indices": len(self.frame_indices), "vectors": self.z.shape[0]})

    def __len__(self) -> int:
        return int(self.z.shape[0])

    @property
    def zdim(self) -> int:
        return int(self.z.shape[1])


def distance_matrix(items: Union[np.ndarray, Sequence[np.ndarray]]) -> np.ndarray:
    """
    Euclidean distances between flattened items.

    Args:
        items: n vectors, images or latent codes (any trailing shape)

    Returns:
        np.ndarray: (n, n) symmetric matrix with zero diagonal
    """
    flat = np.asarray(items, dtype=np.float64).reshape(len(items), -1)
    return squareform(pdist(flat, metric="euclidean"))


def _upper(matrix: np.ndarray) -> np.ndarray:
    return matrix[np.triu_indices(matrix.shape[0], k=1)]


def distance_correlation(a: np.ndarray, b: np.ndarray) -> float:
    """
    Pearson correlation between the strictly-upper-triangle entries of two
    distance matrices.

    Raises:
        AnalysisError: If the sizes differ, fewer than two pairs exist, or
            either matrix is constant off the diagonal
    """
    a, b = np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise AnalysisError(f"Distance matrices differ in size: {a.shape} vs {b.shape}",
                            error_code="SHAPE_MISMATCH", context={"a": a.shape, "b": b.shape})
    x, y = _upper(a), _upper(b)
    if x.size < 2:
        raise AnalysisError("At least three items are needed for a distance correlation",
                            error_code="TOO_FEW_ITEMS", context={"items": a.shape[0]})
    x, y = x - x.mean(), y - y.mean()
    denom = np.sqrt(np.dot(x, x) * np.dot(y, y))
    if denom == 0.0:
        raise AnalysisError("Distance matrix is constant; correlation undefined",
                            error_code="DEGENERATE", context={"items": a.shape[0]})
    return float(np.clip(np.dot(x, y) / denom, -1.0, 1.0))


@dataclass
class PcaResult:
    """Principal axes of a latent trajectory."""

    mean: np.ndarray              # (d,)
    components: np.ndarray        # (d, d); column k is the k-th axis
    variances: np.ndarray         # (d,) descending
    ratios: np.ndarray            # (d,) contribution of each axis
    cumulative: np.ndarray        # (d,) non-decreasing, ends at 1
    projection: np.ndarray        # (n, 2) coordinates on the first two axes

    def transform(self, z: np.ndarray, n_components: Optional[int] = None) -> np.ndarray:
        k = self.components.shape[1] if n_components is None else n_components
        return (np.asarray(z, dtype=np.float64) - self.mean) @ self.components[:, :k]

    def inverse(self, scores: np.ndarray) -> np.ndarray:
        """Latent vectors from scores on the leading axes; other axes sit at the mean."""
        scores = np.asarray(scores, dtype=np.float64)
        k = scores.shape[-1]
        return self.mean + scores @ self.components[:, :k].T


def pca(trajectory: Union[LatentTrajectory, np.ndarray]) -> PcaResult:
    """
    Eigendecomposition of the covariance of the centered latent vectors.

    Axis signs are fixed so that each axis' largest-magnitude entry is
    positive. A one-dimensional latent space gets a zero second coordinate.

    Raises:
        AnalysisError: With fewer than two vectors or zero total variance
    """
    z = trajectory.z if isinstance(trajectory, LatentTrajectory) else np.asarray(trajectory, np.float64)
    if z.ndim != 2 or z.shape[0] < 2:
        raise AnalysisError(f"PCA needs at least two latent vectors, got shape {z.shape}",
                            error_code="TOO_FEW_ITEMS", context={"shape": z.shape})
    mean = z.mean(axis=0)
    centered = z - mean
    cov = centered.T @ centered / (z.shape[0] - 1)
    variances, vectors = np.linalg.eigh(cov)
    order = np.argsort(variances)[::-1]
    variances = np.clip(variances[order], 0.0, None)
    vectors = vectors[:, order]
    pivots = np.argmax(np.abs(vectors), axis=0)
    vectors = vectors * np.sign(vectors[pivots, np.arange(vectors.shape[1])])

    total = variances.sum()
    if total <= 0.0:
        raise AnalysisError("Latent trajectory has zero variance", error_code="DEGENERATE",
                            context={"vectors": z.shape[0]})
    ratios = variances / total
    cumulative = np.cumsum(ratios)
    cumulative[-1] = 1.0

    projection = np.zeros((z.shape[0], 2))
    k = min(2, z.shape[1])
    projection[:, :k] = centered @ vectors[:, :k]
    return PcaResult(mean=mean, components=vectors, variances=variances, ratios=ratios,
                     cumulative=cumulative, projection=projection)


def smoothness(points: np.ndarray) -> float:
    """
    Mean cosine between successive displacement vectors.

    Terms touching a zero-length displacement are skipped.

    Raises:
        AnalysisError: With fewer than three points or no valid term
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[0] < 3:
        raise AnalysisError(f"Smoothness needs at least three points, got shape {points.shape}",
                            error_code="TOO_FEW_ITEMS", context={"shape": points.shape})
    steps = np.diff(points, axis=0)
    norms = np.linalg.norm(steps, axis=1)
    before, after = steps[:-1], steps[1:]
    nb, na = norms[:-1], norms[1:]
    valid = (nb > 0) & (na > 0)
    if not np.any(valid):
        raise AnalysisError("Trajectory never moves; smoothness undefined",
                            error_code="DEGENERATE", context={"points": points.shape[0]})
    cos = np.einsum("ij,ij->i", before[valid], after[valid]) / (nb[valid] * na[valid])
    return float(np.mean(np.clip(cos, -1.0, 1.0)))


def lr_dissimilarity(projection: np.ndarray, segments: PathSegments) -> float:
    """
    Median aligned left/right distance over the median of all cross pairs.

    Both medians run over Δt ∈ [0, T_path).

    Raises:
        AnalysisError: If a segment leaves the projection or all cross
            distances are zero
    """
    projection = np.asarray(projection, dtype=np.float64)
    n = projection.shape[0]
    if segments.t_path < 1 or max(segments.t_left, segments.t_right) + segments.t_path > n:
        raise AnalysisError("Path segments fall outside the trajectory",
                            error_code="OUT_OF_RANGE",
                            context={"t_left": segments.t_left, "t_right": segments.t_right,
                                     "t_path": segments.t_path, "points": n})
    left = projection[segments.t_left:segments.t_left + segments.t_path]
    right = projection[segments.t_right:segments.t_right + segments.t_path]
    aligned = np.linalg.norm(left - right, axis=1)
    cross = np.linalg.norm(left[:, None, :] - right[None, :, :], axis=2)
    denom = float(np.median(cross))
    if denom == 0.0:
        raise AnalysisError("Left and right paths collapse to one point",
                            error_code="DEGENERATE", context={"t_path": segments.t_path})
    return float(np.median(aligned) / denom)
