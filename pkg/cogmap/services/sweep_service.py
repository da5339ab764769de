"""
GAN-weight sweep stage.
"""

import time
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from ..atlas.sweep import SWEEP_FIELDS, SweepRow, alpha_sweep
from ..mazeworld import MazeDataset
from ..models.config import ExperimentConfig, GridCell, Variant
from ..models.run_result import StageResult
from ..nets import Architecture
from .artifacts import write_csv
from .base import BaseStageService
from .training_service import train_config

SWEEP_METRICS = ("r_target", "s_pca", "d_lr")
SUMMARY_FIELDS = (("alpha", "seeds")
                  + tuple(f"{m}_{stat}" for m in SWEEP_METRICS for stat in ("mean", "std")))


def summarize_sweep(rows: List[SweepRow]) -> List[Dict[str, float]]:
    """Seed mean and standard deviation per α (NaN entries ignored)."""
    summary = []
    for alpha in sorted({r.alpha for r in rows}):
        group = [r for r in rows if r.alpha == alpha]
        entry: Dict[str, float] = {'alpha': alpha, 'seeds': len(group)}
        for metric in SWEEP_METRICS:
            values = np.array([getattr(r, metric) for r in group], dtype=np.float64)
            finite = values[np.isfinite(values)]
            entry[f"{metric}_mean"] = float(finite.mean()) if finite.size else float("nan")
            entry[f"{metric}_std"] = float(finite.std()) if finite.size else float("nan")
        summary.append(entry)
    return summary


class SweepService(BaseStageService):
    """Trains one bundle per (α, seed) at ``sweep_tau`` into ``<experiment>/sweep``."""

    stage = "sweep"

    def __init__(self, config: ExperimentConfig, dataset: MazeDataset, logger=None):
        super().__init__(config, logger)
        self.dataset = dataset

    @property
    def sweep_dir(self) -> Path:
        return self.experiment_dir / "sweep"

    def validate_prerequisites(self) -> bool:
        return len(self.dataset) > self.config.sweep_tau + 2

    def run(self, cell: Optional[GridCell] = None) -> StageResult:
        started = time.time()
        result = self.new_result()
        config = self.config
        variant = Variant.parse(config.sweep_variant)
        arch = Architecture(image_size=self.dataset.size, base_channels=config.base_channels,
                            zdim=int(config.zdims[0]))

        def checkpoint_root(alpha: float, seed: int) -> Path:
            return self.sweep_dir / f"alpha{alpha:g}_seed{seed}" / "checkpoints"

        rows = alpha_sweep(self.dataset, config.sweep_alphas, config.seeds, train_config(config),
                           tau=config.sweep_tau, arch=arch, variant=variant,
                           penalty_weight=config.penalty_weight, window=config.analysis_window,
                           checkpoint_root=checkpoint_root)
        result.items_processed = len(rows)
        result.artifacts.append(str(write_csv(self.sweep_dir / "sweep.csv", SWEEP_FIELDS,
                                              (r.to_dict() for r in rows))))
        result.artifacts.append(str(write_csv(self.sweep_dir / "sweep_summary.csv",
                                              SUMMARY_FIELDS, summarize_sweep(rows))))
        result.metadata = {'alphas': list(config.sweep_alphas), 'seeds': list(config.seeds),
                           'tau': config.sweep_tau, 'variant': variant.value}
        return self.finish(result, started)
