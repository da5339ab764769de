"""
Data models for cognitive-map experiments.
"""

from .config import ExperimentConfig, GridCell, Variant, LAP_FRAMES, SUPPORTED_SIZES
from .run_result import StageResult, ExperimentReport, StageStatus
from .exceptions import (
    CogMapError,
    ConfigurationError,
    ShapeError,
    NonFiniteError,
    GradientError,
    DatasetError,
    FormatError,
    TrainingError,
    AnalysisError,
    ClassificationError,
    ExperimentError
)

__all__ = [
    "ExperimentConfig",
    "GridCell",
    "Variant",
    "LAP_FRAMES",
    "SUPPORTED_SIZES",
    "StageResult",
    "ExperimentReport",
    "StageStatus",
    "CogMapError",
    "ConfigurationError",
    "ShapeError",
    "NonFiniteError",
    "GradientError",
    "DatasetError",
    "FormatError",
    "TrainingError",
    "AnalysisError",
    "ClassificationError",
    "ExperimentError"
]
