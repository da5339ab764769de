"""
Error handling for pipeline stages.
"""

import logging
from typing import List, Optional

from ..models.exceptions import (
    CogMapError, ConfigurationError, DatasetError, FormatError, TrainingError,
    AnalysisError, ClassificationError, ExperimentError, ShapeError, NonFiniteError
)


class ErrorHandler:
    """Turns stage failures into logged, structured errors with remediation hints."""

    def __init__(self, logger: Optional[logging.Logger] = None):
        """
        Initialize the error handler.

        Args:
            logger: Optional logger instance for error reporting
        """
        self.logger = logger or logging.getLogger(__name__)

    def handle_stage_error(self, error: Exception, stage: str,
                           cell: Optional[str] = None) -> CogMapError:
        """
        Log a failure of ``stage`` for grid ``cell`` and return it as a package error.

        Package errors are returned unchanged (with stage and cell added to
        their context); anything else is wrapped into ``ExperimentError``.

        Args:
            error: The exception that occurred
            stage: Pipeline stage name (dataset, training, analysis, ...)
            cell: Grid cell slug, if the stage runs per cell

        Returns:
            CogMapError: The structured error to record or re-raise
        """
        context = {'stage': stage}
        if cell:
            context['cell'] = cell

        if isinstance(error, CogMapError):
            error.context.setdefault('stage', stage)
            if cell:
                error.context.setdefault('cell', cell)
            self.logger.error(
                f"{stage} failed{f' for {cell}' if cell else ''}: {error.message}",
                extra={'context': {**context, 'error_code': error.error_code,
                                   'error_type': type(error).__name__,
                                   'details': error.context}}
            )
            return error

        self.logger.error(
            f"Unexpected error in {stage}{f' for {cell}' if cell else ''}: {error}",
            extra={'context': {**context, 'error_type': type(error).__name__}},
            exc_info=error
        )
        wrapped = ExperimentError(
            f"{stage} failed: {error}",
            error_code="STAGE_FAILED",
            context={**context, 'error_type': type(error).__name__}
        )
        wrapped.__cause__ = error
        return wrapped

    def get_error_remediation_steps(self, error: Exception) -> List[str]:
        """
        Get suggested remediation steps for common errors.

        Args:
            error: The exception that occurred

        Returns:
            List[str]: List of suggested remediation steps
        """
        if isinstance(error, ConfigurationError):
            return [
                "Review the configuration file for syntax errors",
                "Run 'cogmap --create-sample-config config.yaml' to see every key with its default",
                "Check that command-line flags use supported values (variants, sizes, tau)"
            ]

        elif isinstance(error, FormatError):
            if error.error_code == 'NOT_FOUND':
                return [
                    "Check the path passed with --dataset or --resume",
                    "Generate the dataset first with 'cogmap gen-dataset'"
                ]
            return [
                "The file is corrupted or was written by another version",
                "Regenerate the dataset or retrain from scratch"
            ]

        elif isinstance(error, DatasetError):
            if error.error_code == 'MISSING_TRAVERSAL':
                return [
                    "The dataset lacks a left or a right lap",
                    "Generate more frames or try another --seed"
                ]
            return [
                "Use at least one full lap of frames",
                "Use a frame size of 16, 32 or 64"
            ]

        elif isinstance(error, TrainingError):
            if error.error_code == 'DIVERGED':
                return [
                    "Lower the learning rate or the GAN weight alpha",
                    "Resume from the last checkpoint before the divergence",
                    "Try another seed"
                ]
            return [
                "Make sure the dataset is longer than the prediction offset tau"
            ]

        elif isinstance(error, (ShapeError, NonFiniteError)):
            return [
                "Check that the checkpoint was trained on frames of the dataset's size",
                "Retrain the bundle if its parameters contain NaN or Inf"
            ]

        elif isinstance(error, (AnalysisError, ClassificationError)):
            return [
                "Check that the bundle was trained on this dataset",
                "Increase the number of closed-loop iterations or frames"
            ]

        # Default remediation steps
        return [
            "Check the error logs for more detailed information",
            "Re-run with --verbose for debug output"
        ]
