"""
Closed-loop stage: rollouts from every ``start_stride``-th frame, classified and dumped.
"""

import time
from pathlib import Path
from typing import List, Optional

from ..dreamer.classify import classifier_config
from ..dreamer.closed_loop import closed_loop_many, default_starts
from ..dreamer.report import RUN_FIELDS, RunRecord, record_run, rollout_dump
from ..mazeworld import MazeDataset
from ..models.config import ExperimentConfig, GridCell
from ..models.exceptions import ExperimentError
from ..models.run_result import StageResult
from ..nets import ModelBundle, load_checkpoint
from .artifacts import read_csv, write_csv
from .base import BaseStageService
from .training_service import TrainingService

RUNS_FILE = "dream_runs.csv"


class DreamService(BaseStageService):
    """Runs the closed loops of the final checkpoint of one grid cell."""

    stage = "dream"

    def __init__(self, config: ExperimentConfig, dataset: MazeDataset, logger=None):
        super().__init__(config, logger)
        self.dataset = dataset
        self.training = TrainingService(config, dataset, logger)

    def validate_prerequisites(self) -> bool:
        return len(self.dataset) > 0

    def runs_path(self, cell: GridCell) -> Path:
        return self.cell_dir(cell) / RUNS_FILE

    def load_bundle(self, cell: GridCell, checkpoint: Optional[Path] = None) -> ModelBundle:
        path = checkpoint or self.training.final_checkpoint(cell)
        if not Path(path).exists():
            raise ExperimentError(f"Final checkpoint missing for {cell.slug}: {path}",
                                  error_code="NO_CHECKPOINTS", context={"checkpoint": str(path)})
        return load_checkpoint(path)

    def run(self, cell: Optional[GridCell] = None,
            checkpoint: Optional[Path] = None) -> StageResult:
        if cell is None:
            raise ExperimentError("Closed loops run per grid cell", error_code="CELL_REQUIRED")
        started = time.time()
        result = self.new_result(cell)
        bundle = self.load_bundle(cell, checkpoint)
        config = self.config
        starts = default_starts(len(self.dataset), config.start_stride)
        runs = closed_loop_many(bundle, self.dataset, starts, iterations=config.dream_iterations,
                                keep=(config.dump_start, config.dump_end))
        classifier = classifier_config(config.fixed_point_threshold, config.cycle_threshold,
                                       config.lyapunov_margin, iterations=config.dream_iterations)

        records: List[RunRecord] = []
        rollouts = self.cell_dir(cell) / "rollouts"
        for run in runs:
            records.append(record_run(run, classifier))
            result.artifacts.extend(str(p) for p in rollout_dump(
                run, config.dump_start, config.dump_end, rollouts))
            result.items_processed += 1
        result.artifacts.append(str(write_csv(self.runs_path(cell), RUN_FIELDS,
                                              (r.to_dict() for r in records))))
        counts = {label: sum(1 for r in records if r.label.value == label)
                  for label in sorted({r.label.value for r in records})}
        result.metadata = {'runs': len(records), 'labels': counts}
        self.logger.info(f"Classified closed loops for {cell.slug}", extra={'context': counts})
        return self.finish(result, started)

    def load_records(self, cell: GridCell) -> List[RunRecord]:
        return [RunRecord.from_dict(row) for row in read_csv(self.runs_path(cell))]
