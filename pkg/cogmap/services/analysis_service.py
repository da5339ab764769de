"""
Analysis stage: latent-space metrics over the analysis window plus image probes.
"""

import time
from pathlib import Path
from typing import Dict, List, Optional

from ..atlas.metrics import (
    SCALAR_METRICS, BundleMetrics, MetricAverage, analyze_bundle, average_metrics, in_window,
)
from ..atlas.probes import bifurcation_dump, pca_grid_dump, variability_probe
from ..mazeworld import MazeDataset
from ..models.config import ExperimentConfig, GridCell
from ..models.exceptions import ExperimentError
from ..models.run_result import StageResult
from ..nets import ModelBundle, load_checkpoint
from .artifacts import write_csv
from .base import BaseStageService
from .training_service import TrainingService, list_checkpoints

METRIC_FIELDS = ("iteration",) + SCALAR_METRICS
AVERAGE_FIELDS = (("variant", "tau", "zdim", "seed", "alpha", "checkpoints")
                  + SCALAR_METRICS + tuple(f"{m}_std" for m in SCALAR_METRICS))
RATIO_FIELDS = ("iteration", "component", "ratio", "cumulative")
PROJECTION_FIELDS = ("t", "pc1", "pc2", "x", "y", "heading", "label")
VARIABILITY_FIELDS = ("frame", "std")
MAXIMA_FIELDS = ("junction", "frame", "value", "window_mean", "overall_mean")


def metric_rows(metrics: List[BundleMetrics]) -> List[Dict[str, object]]:
    return [{'iteration': m.iteration, **m.scalars()} for m in metrics]


def ratio_rows(metrics: List[BundleMetrics]) -> List[Dict[str, object]]:
    return [{'iteration': m.iteration, 'component': k + 1, 'ratio': float(m.ratios[k]),
             'cumulative': float(m.cumulative[k])}
            for m in metrics for k in range(len(m.ratios))]


def projection_rows(metrics: BundleMetrics) -> List[Dict[str, object]]:
    """First two principal scores per frame with the pose, for colouring by position."""
    return [{'t': t, 'pc1': float(metrics.projection[t, 0]),
             'pc2': float(metrics.projection[t, 1]) if metrics.projection.shape[1] > 1 else 0.0,
             'x': float(metrics.poses[t, 0]), 'y': float(metrics.poses[t, 1]),
             'heading': float(metrics.poses[t, 2]), 'label': int(metrics.labels[t])}
            for t in range(len(metrics.projection))]


class AnalysisService(BaseStageService):
    """Writes the metric tables and image probes of one grid cell into its directory."""

    stage = "analysis"

    def __init__(self, config: ExperimentConfig, dataset: MazeDataset, logger=None):
        super().__init__(config, logger)
        self.dataset = dataset
        self.training = TrainingService(config, dataset, logger)

    def validate_prerequisites(self) -> bool:
        return len(self.dataset) > max(self.config.taus) + 2

    def window_checkpoints(self, cell: GridCell) -> List[Path]:
        return [path for iteration, path in list_checkpoints(self.training.checkpoint_dir(cell))
                if in_window(iteration, self.config.iters, self.config.analysis_window)]

    def run(self, cell: Optional[GridCell] = None, allow_untrained: bool = False) -> StageResult:
        """
        Analyze the checkpoints of ``cell`` inside the analysis window.

        With ``allow_untrained`` a cell without checkpoints is analyzed with
        its freshly initialized bundle.

        Raises:
            ExperimentError: If the cell has no checkpoint in the window
        """
        if cell is None:
            raise ExperimentError("Analysis runs per grid cell", error_code="CELL_REQUIRED")
        started = time.time()
        result = self.new_result(cell)
        paths = self.window_checkpoints(cell)
        if paths:
            bundles = (load_checkpoint(p) for p in paths)
        elif allow_untrained:
            self.logger.warning(f"No checkpoints for {cell.slug}; analyzing the untrained bundle")
            bundles = iter([self.training.create_bundle(cell)])
        else:
            raise ExperimentError(f"No checkpoints inside the analysis window for {cell.slug}",
                                  error_code="NO_CHECKPOINTS",
                                  context={"directory": str(self.training.checkpoint_dir(cell)),
                                           "window": self.config.analysis_window})

        metrics: List[BundleMetrics] = []
        bundle: Optional[ModelBundle] = None
        for bundle in bundles:
            metrics.append(analyze_bundle(bundle, self.dataset))
            result.items_processed += 1
        assert bundle is not None
        averaged = average_metrics(metrics)
        result.artifacts.extend(str(p) for p in self.write_tables(cell, metrics, averaged))
        result.artifacts.extend(str(p) for p in self.write_probes(cell, bundle, metrics[-1]))
        result.metadata = {'checkpoints': averaged.iterations, **averaged.scalars()}
        return self.finish(result, started)

    def write_tables(self, cell: GridCell, metrics: List[BundleMetrics],
                     averaged: MetricAverage) -> List[Path]:
        out = self.cell_dir(cell)
        average = {'variant': cell.variant.value, 'tau': cell.tau, 'zdim': cell.zdim,
                   'seed': cell.seed, 'alpha': cell.alpha, 'checkpoints': len(metrics),
                   **averaged.scalars(), **{f"{k}_std": v for k, v in averaged.std.items()}}
        return [
            write_csv(out / "metrics.csv", METRIC_FIELDS, metric_rows(metrics)),
            write_csv(out / "metrics_average.csv", AVERAGE_FIELDS, [average]),
            write_csv(out / "pca_ratios.csv", RATIO_FIELDS, ratio_rows(metrics)),
            write_csv(out / "projection.csv", PROJECTION_FIELDS, projection_rows(metrics[-1])),
        ]

    def write_probes(self, cell: GridCell, bundle: ModelBundle,
                     final: BundleMetrics) -> List[Path]:
        """PCA grid, variability profile and bifurcation grids of the last analyzed bundle."""
        out = self.cell_dir(cell)
        written: List[Path] = []
        if self.config.run_pca_grid and final.trajectory is not None:
            grid = pca_grid_dump(bundle, final.trajectory, n=self.config.pca_grid, result=final.pca,
                                 out_path=out / "pca_grid.png")
            if grid.path is not None:
                written.append(grid.path)
        if self.config.run_variability:
            profile = variability_probe(bundle, self.dataset, samples=self.config.variability_samples,
                                        window=self.config.bifurcation_window)
            written.append(write_csv(out / "variability.csv", VARIABILITY_FIELDS,
                                     ({'frame': t, 'std': float(v)}
                                      for t, v in enumerate(profile.values))))
            written.append(write_csv(out / "variability_maxima.csv", MAXIMA_FIELDS,
                                     profile.junction_maxima))
        if self.config.run_bifurcation:
            dump = bifurcation_dump(bundle, self.dataset, window=self.config.bifurcation_window,
                                    out_dir=out)
            written.extend(dump.paths)
        return written
