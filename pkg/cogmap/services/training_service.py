"""
Training stage: one bundle per grid cell, checkpointed and resumable.
"""

import re
import time
from pathlib import Path
from typing import List, Optional, Tuple, Union

from ..mazeworld import MazeDataset
from ..models.config import ExperimentConfig, GridCell
from ..models.exceptions import ConfigurationError, ExperimentError
from ..models.run_result import StageResult, StageStatus
from ..nets import Architecture, ModelBundle, TrainConfig, checkpoint_name, load_checkpoint, train
from .base import BaseStageService

CHECKPOINT_PATTERN = re.compile(r"^ckpt_(\d+)\.cgmp$")


def train_config(config: ExperimentConfig) -> TrainConfig:
    return TrainConfig(batch_size=config.batch_size, iterations=config.iters,
                       critic_steps=config.critic_steps, learning_rate=config.learning_rate,
                       beta1=config.beta1, beta2=config.beta2,
                       checkpoint_interval=config.checkpoint_interval,
                       log_interval=config.log_interval, gp_point=config.gp_point)


def list_checkpoints(directory: Union[str, Path]) -> List[Tuple[int, Path]]:
    """(iteration, path) of every checkpoint in ``directory``, oldest first."""
    directory = Path(directory)
    if not directory.is_dir():
        return []
    found = []
    for path in directory.iterdir():
        match = CHECKPOINT_PATTERN.match(path.name)
        if match:
            found.append((int(match.group(1)), path))
    return sorted(found)


class TrainingService(BaseStageService):
    """Trains the bundle of a grid cell into ``<cell>/checkpoints`` with ``<cell>/losses.csv``."""

    stage = "training"

    def __init__(self, config: ExperimentConfig, dataset: MazeDataset, logger=None):
        super().__init__(config, logger)
        self.dataset = dataset

    def checkpoint_dir(self, cell: GridCell) -> Path:
        return self.cell_dir(cell) / "checkpoints"

    def final_checkpoint(self, cell: GridCell) -> Path:
        return self.checkpoint_dir(cell) / checkpoint_name(self.config.iters)

    def validate_prerequisites(self) -> bool:
        train_config(self.config).validate()
        if len(self.dataset) <= max(self.config.taus):
            raise ConfigurationError("Dataset is shorter than the largest prediction offset",
                                     error_code="DATASET_TOO_SHORT",
                                     context={"frames": len(self.dataset),
                                              "taus": list(self.config.taus)})
        return True

    def create_bundle(self, cell: GridCell) -> ModelBundle:
        arch = Architecture(image_size=self.dataset.size, base_channels=self.config.base_channels,
                            zdim=cell.zdim)
        return ModelBundle.create(arch, cell.variant, tau=cell.tau, alpha=cell.alpha,
                                  penalty_weight=self.config.penalty_weight, seed=cell.seed)

    def _resume_point(self, cell: GridCell, resume_from: Optional[Path]) -> ModelBundle:
        if resume_from is not None:
            bundle = load_checkpoint(resume_from)
            mismatched = [name for name, want, got in (
                ("variant", cell.variant, bundle.variant), ("tau", cell.tau, bundle.tau),
                ("zdim", cell.zdim, bundle.zdim), ("seed", cell.seed, bundle.seed))
                if want != got]
            if mismatched:
                raise ExperimentError(
                    f"Checkpoint {resume_from} does not belong to {cell.slug}",
                    error_code="RESUME_MISMATCH",
                    context={"checkpoint": str(resume_from), "fields": mismatched})
            return bundle
        existing = list_checkpoints(self.checkpoint_dir(cell))
        if existing:
            iteration, path = existing[-1]
            self.logger.info(f"Resuming {cell.slug} from iteration {iteration}",
                             extra={'context': {'checkpoint': str(path)}})
            return load_checkpoint(path)
        return self.create_bundle(cell)

    def run(self, cell: Optional[GridCell] = None,
            resume_from: Optional[Union[str, Path]] = None) -> StageResult:
        """
        Train ``cell`` up to ``config.iters``.

        Without ``resume_from`` the latest checkpoint of the cell is resumed;
        a cell whose final checkpoint exists is skipped.
        """
        if cell is None:
            raise ExperimentError("Training runs per grid cell", error_code="CELL_REQUIRED")
        started = time.time()
        result = self.new_result(cell)
        if resume_from is None and self.final_checkpoint(cell).exists():
            result.status = StageStatus.SKIPPED
            result.artifacts.append(str(self.final_checkpoint(cell)))
            return self.finish(result, started)

        bundle = self._resume_point(cell, Path(resume_from) if resume_from else None)
        if bundle.iteration >= self.config.iters:
            self.logger.warning(f"{cell.slug} is already trained to iteration {bundle.iteration}")
            result.status = StageStatus.SKIPPED
            return self.finish(result, started)

        start_iteration = bundle.iteration
        run = train(self.dataset, bundle, train_config(self.config),
                    checkpoint_dir=self.checkpoint_dir(cell),
                    loss_csv=self.cell_dir(cell) / "losses.csv")
        result.items_processed = bundle.iteration - start_iteration
        result.artifacts.extend(str(p) for p in run.checkpoints)
        result.metadata = {'start_iteration': start_iteration, 'iterations': bundle.iteration,
                           'training_seconds': run.execution_time}
        return self.finish(result, started)
