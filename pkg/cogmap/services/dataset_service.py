"""
Dataset stage: render the maze walk once and reuse the file afterwards.
"""

import time
from pathlib import Path
from typing import Optional

from ..mazeworld import MazeConfig, MazeDataset, generate, load, save
from ..models.config import GridCell
from ..models.run_result import StageResult, StageStatus
from .base import BaseStageService


class DatasetService(BaseStageService):
    """Generates ``config.dataset`` unless it already exists."""

    stage = "dataset"

    @property
    def path(self) -> Path:
        return Path(self.config.dataset)

    def maze_config(self) -> MazeConfig:
        return MazeConfig(size=self.config.size, frames=self.config.frames,
                          seed=self.config.dataset_seed,
                          junction_probability=self.config.junction_probability)

    def validate_prerequisites(self) -> bool:
        self.maze_config().validate()
        return True

    def run(self, cell: Optional[GridCell] = None, force: bool = False) -> StageResult:
        started = time.time()
        result = self.new_result()
        if self.path.exists() and not force:
            self.logger.info(f"Dataset exists, skipping generation: {self.path}")
            result.status = StageStatus.SKIPPED
            result.artifacts.append(str(self.path))
            return self.finish(result, started)

        self.validate_prerequisites()
        dataset = generate(self.maze_config())
        save(dataset, self.path)
        result.items_processed = len(dataset)
        result.artifacts.append(str(self.path))
        result.metadata = {'frames': len(dataset), 'size': dataset.size,
                           'junctions': dataset.junction_indices}
        self.logger.info(f"Wrote dataset: {self.path}", extra={'context': result.metadata})
        return self.finish(result, started)

    def load(self) -> MazeDataset:
        """
        Raises:
            DatasetError: If the file does not exist
            FormatError: If the file is malformed
        """
        return load(self.path)
