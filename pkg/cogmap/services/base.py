"""
Base interface for pipeline stage services.
"""

import logging
import time
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Optional

from ..models.config import ExperimentConfig, GridCell
from ..models.run_result import StageResult, StageStatus


class BaseStageService(ABC):
    """Abstract base class for the dataset, training, analysis, dream and sweep stages."""

    stage: str = "stage"

    def __init__(self, config: ExperimentConfig, logger: Optional[logging.Logger] = None):
        self.config = config
        self.logger = logger or logging.getLogger(__name__)

    @property
    def experiment_dir(self) -> Path:
        return Path(self.config.out) / self.config.experiment

    def cell_dir(self, cell: GridCell) -> Path:
        """``<out>/<experiment>/<variant>_tau<τ>_z<d_z>_seed<k>``."""
        return self.experiment_dir / cell.slug

    def new_result(self, cell: Optional[GridCell] = None) -> StageResult:
        return StageResult(stage=self.stage, cell=cell.slug if cell else "-",
                           status=StageStatus.IN_PROGRESS)

    @staticmethod
    def finish(result: StageResult, started: float) -> StageResult:
        result.execution_time = time.time() - started
        if result.status == StageStatus.IN_PROGRESS:
            result.status = StageStatus.SUCCESS
        return result

    @abstractmethod
    def run(self, cell: Optional[GridCell] = None) -> StageResult:
        """Execute the stage, for one grid cell when the stage runs per cell."""
        pass

    @abstractmethod
    def validate_prerequisites(self) -> bool:
        """Validate that the inputs of the stage exist."""
        pass
