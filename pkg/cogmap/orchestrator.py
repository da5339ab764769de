"""
Experiment orchestrator: runs the pipeline stages over the grid and records the outcome.
"""

import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from . import __version__
from .mazeworld import MazeDataset
from .models.config import ExperimentConfig, GridCell
from .models.exceptions import CogMapError, ExperimentError
from .models.run_result import ExperimentReport, StageResult, StageStatus
from .services.analysis_service import AnalysisService
from .services.dataset_service import DatasetService
from .services.dream_service import DreamService
from .services.error_handler import ErrorHandler
from .services.logging import LoggingService
from .services.report_service import ReportService
from .services.sweep_service import SweepService
from .services.training_service import TrainingService

CELL_STAGES = ("training", "analysis", "dream")


def _cell_service(stage: str, config: ExperimentConfig, dataset: MazeDataset):
    if stage == "training":
        return TrainingService(config, dataset)
    if stage == "analysis":
        return AnalysisService(config, dataset)
    if stage == "dream":
        return DreamService(config, dataset)
    raise ExperimentError(f"Unknown per-cell stage '{stage}'", error_code="UNKNOWN_STAGE",
                          context={"stage": stage})


def run_cell_stage(config: ExperimentConfig, stage: str, cell: GridCell,
                   options: Optional[Dict[str, Any]] = None,
                   dataset: Optional[MazeDataset] = None) -> StageResult:
    """
    Run one per-cell stage and turn any failure into a FAILED result.

    Module-level so worker processes can execute it.
    """
    started = time.time()
    handler = ErrorHandler(logging.getLogger(__name__))
    try:
        dataset = dataset if dataset is not None else DatasetService(config).load()
        return _cell_service(stage, config, dataset).run(cell, **(options or {}))
    except KeyboardInterrupt:
        raise
    except Exception as e:
        error = handler.handle_stage_error(e, stage, cell.slug)
        result = StageResult(stage=stage, cell=cell.slug, status=StageStatus.IN_PROGRESS)
        result.add_error(error.message)
        result.metadata = {'error_code': error.error_code,
                           'remediation': handler.get_error_remediation_steps(error)}
        result.execution_time = time.time() - started
        return result


class ExperimentOrchestrator:
    """Main orchestrator class that coordinates the stage services."""

    def __init__(self, config: ExperimentConfig, logging_service: Optional[LoggingService] = None):
        """
        Args:
            config: Validated experiment configuration
            logging_service: Logging service to reuse (one is created when None)
        """
        self.config = config
        self.logging_service = logging_service
        self.logger = logging.getLogger(__name__)
        self.error_handler = ErrorHandler(self.logger)
        self.dataset_service = DatasetService(config)
        self._dataset: Optional[MazeDataset] = None

        self.results: List[StageResult] = []
        self.start_time: Optional[datetime] = None
        self.experiment_report: Optional[ExperimentReport] = None

    def initialize(self) -> bool:
        """Set up logging and check the configuration's dataset settings."""
        if self.logging_service is None:
            self.logging_service = LoggingService(self.config)
        self.dataset_service.validate_prerequisites()
        self.start_time = datetime.now()
        self.results = []
        self.logging_service.log_info("Experiment orchestrator initialized", {
            'experiment': self.config.experiment, 'out': self.config.out,
            'cells': len(self.config.grid_cells()), 'jobs': self.config.jobs})
        return True

    @property
    def experiment_dir(self) -> Path:
        return Path(self.config.out) / self.config.experiment

    @property
    def dataset(self) -> MazeDataset:
        if self._dataset is None:
            self._dataset = self.dataset_service.load()
        return self._dataset

    def _record(self, result: StageResult) -> StageResult:
        self.results.append(result)
        return result

    def _require_initialized(self) -> None:
        if self.start_time is None:
            raise ExperimentError("Orchestrator not initialized. Call initialize() first.",
                                  error_code="NOT_INITIALIZED")

    # Stages

    def generate_dataset(self, force: bool = False) -> StageResult:
        self._require_initialized()
        try:
            result = self.dataset_service.run(force=force)
        except CogMapError as e:
            raise self.error_handler.handle_stage_error(e, "dataset")
        self._dataset = None
        return self._record(result)

    def run_cells(self, stage: str, cells: Optional[Sequence[GridCell]] = None,
                  options: Optional[Dict[str, Any]] = None) -> List[StageResult]:
        """
        Run ``stage`` for every cell, in worker processes when ``jobs`` > 1.

        Results keep the order of ``cells``.
        """
        self._require_initialized()
        cells = list(cells if cells is not None else self.config.grid_cells())
        assert self.logging_service is not None
        self.logging_service.start_stage(stage, len(cells))
        results: List[StageResult] = []
        if self.config.jobs > 1 and len(cells) > 1:
            with ProcessPoolExecutor(max_workers=self.config.jobs) as pool:
                futures = [pool.submit(run_cell_stage, self.config, stage, cell, options)
                           for cell in cells]
                for future in futures:
                    results.append(future.result())
                    self.logging_service.update_stage(1, int(not results[-1].success))
        else:
            dataset = self.dataset
            for cell in cells:
                results.append(run_cell_stage(self.config, stage, cell, options, dataset))
                self.logging_service.update_stage(1, int(not results[-1].success))
        self.logging_service.complete_stage()
        for result in results:
            if not result.success:
                self.logging_service.log_warning(f"{stage} failed for {result.cell}", {
                    'stage': stage, 'cell': result.cell, 'errors': result.error_messages})
            self._record(result)
        return results

    def train(self, cells: Optional[Sequence[GridCell]] = None,
              resume_from: Optional[str] = None) -> List[StageResult]:
        options = {'resume_from': resume_from} if resume_from else None
        return self.run_cells("training", cells, options)

    def analyze(self, cells: Optional[Sequence[GridCell]] = None,
                allow_untrained: bool = False) -> List[StageResult]:
        return self.run_cells("analysis", cells, {'allow_untrained': allow_untrained})

    def dream(self, cells: Optional[Sequence[GridCell]] = None) -> List[StageResult]:
        return self.run_cells("dream", cells)

    def sweep(self) -> StageResult:
        self._require_initialized()
        try:
            return self._record(SweepService(self.config, self.dataset).run())
        except CogMapError as e:
            error = self.error_handler.handle_stage_error(e, "sweep")
            result = StageResult(stage="sweep", cell="-", status=StageStatus.IN_PROGRESS)
            result.add_error(error.message)
            return self._record(result)

    def assemble_report(self) -> StageResult:
        self._require_initialized()
        return self._record(ReportService(self.config).run())

    def run_pipeline(self) -> ExperimentReport:
        """
        Dataset, training, analysis and closed loops for the whole grid, the
        GAN-weight sweep, then the report tables. Stages whose artifacts
        already exist are skipped.
        """
        self.generate_dataset()
        cells = self.config.grid_cells()
        trained = [r.cell for r in self.train(cells) if r.success]
        ready = [c for c in cells if c.slug in trained]

        pending = [c for c in ready
                   if not (self.experiment_dir / c.slug / "metrics_average.csv").exists()]
        self._skip("analysis", [c for c in ready if c not in pending])
        self.analyze(pending)
        pending = [c for c in ready
                   if not (self.experiment_dir / c.slug / "dream_runs.csv").exists()]
        self._skip("dream", [c for c in ready if c not in pending])
        self.dream(pending)
        if (self.experiment_dir / "sweep" / "sweep.csv").exists():
            self._record(StageResult(stage="sweep", cell="-", status=StageStatus.SKIPPED))
        else:
            self.sweep()
        self.assemble_report()
        return self.finish()

    def _skip(self, stage: str, cells: Sequence[GridCell]) -> None:
        for cell in cells:
            self._record(StageResult(stage=stage, cell=cell.slug, status=StageStatus.SKIPPED))

    # Reporting

    def finish(self) -> ExperimentReport:
        """Collect the recorded stage results into the experiment report."""
        self._require_initialized()
        assert self.start_time is not None
        end_time = datetime.now()
        report = ExperimentReport(start_time=self.start_time, end_time=end_time,
                                  total_execution_time=(end_time - self.start_time).total_seconds())
        for result in self.results:
            report.add_result(result)
        self.experiment_report = report
        if self.logging_service is not None:
            self.logging_service.log_info("Experiment finished", {
                'stages': report.total_stages, 'failed': report.failed_stages,
                'success_rate': report.success_rate})
        return report

    def generate_manifest(self, output_path: Optional[str] = None) -> Dict[str, Any]:
        """
        Manifest of every stage result of this command, optionally saved as JSON.

        Raises:
            ExperimentError: If no report is available yet
        """
        report = self._report()
        manifest = {
            'experiment_metadata': {
                'timestamp': report.start_time.isoformat(),
                'tool_version': __version__,
                'experiment': self.config.experiment,
                'dataset': self.config.dataset,
                'total_execution_time': report.total_execution_time,
                'success_rate': report.success_rate,
            },
            'experiment_summary': {
                'total_stages': report.total_stages,
                'successful_stages': report.successful_stages,
                'failed_stages': report.failed_stages,
                'partial_stages': report.partial_stages,
                'skipped_stages': report.skipped_stages,
            },
            'stage_details': [r.to_dict() for r in report.results],
        }
        if output_path:
            output_file = Path(output_path)
            output_file.parent.mkdir(parents=True, exist_ok=True)
            with open(output_file, 'w', encoding='utf-8') as f:
                json.dump(manifest, f, indent=2, default=str)
            self.logger.info(f"Experiment manifest saved to: {output_path}")
        return manifest

    def generate_summary(self) -> str:
        """Human-readable summary of the stage results."""
        report = self._report()
        lines = [
            "=" * 60,
            "Cognitive Map Experiment Summary",
            "=" * 60,
            f"Started: {report.start_time.strftime('%Y-%m-%d %H:%M:%S')}",
            f"Experiment: {self.experiment_dir}",
            f"Dataset: {self.config.dataset}",
            f"Total Execution Time: {report.total_execution_time:.2f} seconds",
            "",
            "Overall Results:",
            f"  Total Stages: {report.total_stages}",
            f"  Successful: {report.successful_stages}",
            f"  Skipped: {report.skipped_stages}",
            f"  Failed: {report.failed_stages}",
            f"  Partial: {report.partial_stages}",
            f"  Success Rate: {report.success_rate:.1f}%",
            "",
            "Stage Details:",
            "-" * 40,
        ]
        symbols = {StageStatus.SUCCESS: "✓", StageStatus.SKIPPED: "-", StageStatus.FAILED: "✗"}
        for result in report.results:
            lines.append(f"{symbols.get(result.status, '⚠')} {result.stage} [{result.cell}]: "
                         f"{result.status.value}, {result.items_processed} items, "
                         f"{result.execution_time:.2f}s")
            for error in result.error_messages:
                lines.append(f"      - {error}")
        lines.extend(["", "=" * 60])
        return "\n".join(lines)

    def save_summary(self, output_path: str) -> None:
        output_file = Path(output_path)
        output_file.parent.mkdir(parents=True, exist_ok=True)
        output_file.write_text(self.generate_summary(), encoding='utf-8')
        self.logger.info(f"Experiment summary saved to: {output_path}")

    def _report(self) -> ExperimentReport:
        if self.experiment_report is None:
            raise ExperimentError("No experiment report available. Run a stage first.",
                                  error_code="NO_REPORT")
        return self.experiment_report

    def cleanup(self) -> None:
        if self.logging_service is not None:
            self.logging_service.close()
