"""
Custom exception classes for cognitive-map experiments.
"""

from typing import Optional, Dict, Any


class CogMapError(Exception):
    """Base exception for every failure raised by the package."""

    def __init__(self, message: str, error_code: Optional[str] = None,
                 context: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.error_code = error_code
        self.context = context or {}


class ConfigurationError(CogMapError):
    """Exception raised for configuration-related errors."""
    pass


class ShapeError(CogMapError):
    """Exception raised when tensor or image shapes do not agree."""
    pass


class NonFiniteError(CogMapError):
    """Exception raised when a NaN or Inf appears in a computation."""
    pass


class GradientError(CogMapError):
    """Exception raised for invalid differentiation requests."""
    pass


class DatasetError(CogMapError):
    """Exception raised for maze dataset generation or lookup errors."""
    pass


class FormatError(CogMapError):
    """Exception raised when a dataset or checkpoint file is malformed."""
    pass


class TrainingError(CogMapError):
    """Exception raised when training cannot proceed (e.g. divergence)."""
    pass


class AnalysisError(CogMapError):
    """Exception raised for invalid latent-space analysis inputs."""
    pass


class ClassificationError(CogMapError):
    """Exception raised when a closed-loop run cannot be classified."""
    pass


class ExperimentError(CogMapError):
    """Exception raised for pipeline stage failures."""
    pass
