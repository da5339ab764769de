"""
Latent-space analyses: distance structure, PCA maps, probes and statistics.
"""

from .geometry import (
    LatentTrajectory, PcaResult, distance_correlation, distance_matrix, lr_dissimilarity, pca,
    smoothness,
)
from .metrics import (
    BundleMetrics, MetricAverage, analyze_bundle, average_metrics, encode_frames, in_window,
    predict_frames,
)
from .probes import (
    BifurcationDump, PcaGrid, VariabilityProfile, bifurcation_dump, pca_grid_dump, pca_lattice,
    pixel_std, variability_probe,
)
from .stats import (
    PairComparison, TukeyResult, studentized_range_quantile, studentized_range_sf, tukey_hsd,
)
from .sweep import SWEEP_FIELDS, SweepRow, alpha_sweep, train_and_measure

__all__ = [
    "LatentTrajectory",
    "PcaResult",
    "distance_matrix",
    "distance_correlation",
    "pca",
    "smoothness",
    "lr_dissimilarity",
    "BundleMetrics",
    "MetricAverage",
    "analyze_bundle",
    "average_metrics",
    "encode_frames",
    "in_window",
    "predict_frames",
    "BifurcationDump",
    "PcaGrid",
    "VariabilityProfile",
    "bifurcation_dump",
    "pca_grid_dump",
    "pca_lattice",
    "pixel_std",
    "variability_probe",
    "PairComparison",
    "TukeyResult",
    "studentized_range_quantile",
    "studentized_range_sf",
    "tukey_hsd",
    "SWEEP_FIELDS",
    "SweepRow",
    "alpha_sweep",
    "train_and_measure",
]
