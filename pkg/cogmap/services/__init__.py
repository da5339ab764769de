"""
Service classes shared by the pipeline stages.

Stage services live in their own modules and are imported from there, so
that the domain packages can use the logging helpers without import cycles.
"""

from .base import BaseStageService
from .logging import LoggingService, ProgressTracker, StructuredFormatter, configure_logging
from .error_handler import ErrorHandler

__all__ = [
    "BaseStageService",
    "LoggingService",
    "ProgressTracker",
    "StructuredFormatter",
    "configure_logging",
    "ErrorHandler"
]
