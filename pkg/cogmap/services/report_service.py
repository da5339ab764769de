"""
Report assembly: cross-condition tables and image grids gathered from the cell directories.
"""

import math
import shutil
import time
from collections import OrderedDict
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from ..atlas.stats import tukey_hsd
from ..dreamer.report import RunRecord, aggregate
from ..models.config import ExperimentConfig, GridCell
from ..models.exceptions import AnalysisError, CogMapError
from ..models.run_result import StageResult
from .artifacts import read_csv, write_csv
from .base import BaseStageService

DISTANCE_FIELDS = ("variant", "tau", "zdim", "seed", "r_input", "r_target")
FEATURE_FIELDS = ("variant", "tau", "zdim", "seed", "s_pca", "d_lr")
CUMULATIVE_FIELDS = ("variant", "tau", "zdim", "seed", "component", "cumulative")
TUKEY_FIELDS = ("metric", "tau", "zdim", "group_a", "group_b", "mean_difference", "q_statistic",
                "p_value")
TESTED_METRICS = ("r_input", "r_target", "s_pca", "d_lr")
JUNCTION_FIELDS = ("variant", "tau", "zdim", "seed", "junction", "frame", "value", "window_mean",
                   "overall_mean")
SWEEP_TABLES = ("sweep.csv", "sweep_summary.csv")


def _cell_key(cell: GridCell) -> Dict[str, object]:
    return {'variant': cell.variant.value, 'tau': cell.tau, 'zdim': cell.zdim, 'seed': cell.seed}


def mean_cumulative(rows: Sequence[Dict[str, str]]) -> Dict[int, float]:
    """Cumulative contribution per component averaged over the analyzed checkpoints."""
    values: Dict[int, List[float]] = OrderedDict()
    for row in rows:
        values.setdefault(int(row['component']), []).append(float(row['cumulative']))
    return {k: float(np.mean(v)) for k, v in values.items()}


def tukey_rows(averages: List[Dict[str, object]], metric: str) -> List[Dict[str, object]]:
    """
    Variants compared per (τ, d_z) with seeds as replicates.

    Conditions with fewer than two variants, fewer than two finite values
    per variant or zero residual variance are left out.
    """
    rows: List[Dict[str, object]] = []
    conditions = sorted({(int(a['tau']), int(a['zdim'])) for a in averages})
    for tau, zdim in conditions:
        groups: "OrderedDict[str, List[float]]" = OrderedDict()
        for a in averages:
            if int(a['tau']) == tau and int(a['zdim']) == zdim:
                value = float(a[metric])
                if not math.isnan(value):
                    groups.setdefault(str(a['variant']), []).append(value)
        if len(groups) < 2:
            continue
        names = list(groups)
        try:
            result = tukey_hsd([groups[n] for n in names])
        except AnalysisError:
            continue
        for c in result.comparisons:
            rows.append({'metric': metric, 'tau': tau, 'zdim': zdim,
                         'group_a': names[c.group_a], 'group_b': names[c.group_b],
                         'mean_difference': c.mean_difference, 'q_statistic': c.q_statistic,
                         'p_value': c.p_value})
    return rows


class ReportService(BaseStageService):
    """Writes ``<experiment>/report`` from the per-cell analysis and closed-loop outputs."""

    stage = "report"

    def __init__(self, config: ExperimentConfig, logger=None):
        super().__init__(config, logger)

    @property
    def report_dir(self) -> Path:
        return self.experiment_dir / "report"

    def validate_prerequisites(self) -> bool:
        return self.experiment_dir.is_dir()

    def run(self, cell: Optional[GridCell] = None) -> StageResult:
        started = time.time()
        result = self.new_result()
        averages: List[Dict[str, object]] = []
        cumulative: List[Dict[str, object]] = []
        records: List[RunRecord] = []
        maxima: List[Dict[str, object]] = []
        for grid_cell in self.config.grid_cells():
            try:
                self._collect_cell(grid_cell, averages, cumulative, records, result)
                maxima.extend(self._junction_maxima(grid_cell))
                result.items_processed += 1
            except CogMapError as e:
                result.add_error(f"{grid_cell.slug}: {e.message}")

        out = self.report_dir
        if averages:
            result.artifacts.append(str(write_csv(out / "distance_correlation.csv",
                                                  DISTANCE_FIELDS, averages)))
            result.artifacts.append(str(write_csv(out / "pca_features.csv", FEATURE_FIELDS,
                                                  averages)))
            result.artifacts.append(str(write_csv(out / "pca_ratios.csv", CUMULATIVE_FIELDS,
                                                  cumulative)))
            tests = [row for metric in TESTED_METRICS for row in tukey_rows(averages, metric)]
            result.artifacts.append(str(write_csv(out / "tukey_hsd.csv", TUKEY_FIELDS, tests)))
        if records:
            dynamics = aggregate(records, merge_undetermined=self.config.merge_undetermined)
            result.artifacts.extend(str(p) for p in dynamics.write(out))
        if maxima:
            result.artifacts.append(str(write_csv(out / "variability_maxima.csv", JUNCTION_FIELDS,
                                                  maxima)))
        result.artifacts.extend(str(p) for p in self._copy_sweep_tables())
        result.metadata = {'cells': result.items_processed, 'closed_loop_runs': len(records),
                           'junction_maxima': len(maxima)}
        return self.finish(result, started)

    def _collect_cell(self, cell: GridCell, averages: List[Dict[str, object]],
                      cumulative: List[Dict[str, object]], records: List[RunRecord],
                      result: StageResult) -> None:
        cell_dir = self.cell_dir(cell)
        key = _cell_key(cell)
        average = read_csv(cell_dir / "metrics_average.csv")[0]
        averages.append({**key, **{m: float(average[m]) if average[m] else math.nan
                                   for m in TESTED_METRICS}})
        for component, value in mean_cumulative(read_csv(cell_dir / "pca_ratios.csv")).items():
            cumulative.append({**key, 'component': component, 'cumulative': value})

        runs = cell_dir / "dream_runs.csv"
        if runs.exists():
            records.extend(RunRecord.from_dict(row) for row in read_csv(runs))

        images = sorted(cell_dir.glob("pca_grid.png")) + sorted(cell_dir.glob("bifurcation_j*.png"))
        for image in images:
            target = self.report_dir / "images" / f"{cell.slug}_{image.name}"
            target.parent.mkdir(parents=True, exist_ok=True)
            shutil.copyfile(image, target)
            result.artifacts.append(str(target))

    def _junction_maxima(self, cell: GridCell) -> List[Dict[str, object]]:
        path = self.cell_dir(cell) / "variability_maxima.csv"
        if not path.exists():
            return []
        return [{**_cell_key(cell), **row} for row in read_csv(path)]

    def _copy_sweep_tables(self) -> List[Path]:
        """GAN-weight sweep tables, copied unchanged when the sweep has run."""
        copied = []
        for name in SWEEP_TABLES:
            source = self.experiment_dir / "sweep" / name
            if source.exists():
                target = self.report_dir / name
                target.parent.mkdir(parents=True, exist_ok=True)
                shutil.copyfile(source, target)
                copied.append(target)
        return copied
