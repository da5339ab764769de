"""
Structured logging and progress tracking for experiment runs.

Every record may carry a ``context`` dict (``extra={'context': {...}}``); the
JSON file handler writes it next to the message, the console handler drops it.
"""

import json
import logging
import logging.handlers
import time
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional

from ..models.config import ExperimentConfig

ROOT_LOGGER = 'cogmap'
CONSOLE_FORMAT = '%(asctime)s - %(levelname)s - %(message)s'
LOG_FILE_BYTES = 10 * 1024 * 1024
LOG_FILE_BACKUPS = 5


class StructuredFormatter(logging.Formatter):
    """Formats each record as one JSON object."""

    def format(self, record: logging.LogRecord) -> str:
        entry: Dict[str, Any] = {
            'timestamp': datetime.fromtimestamp(record.created).isoformat(),
            'level': record.levelname,
            'logger': record.name,
            'message': record.getMessage(),
            'where': f"{record.module}.{record.funcName}:{record.lineno}",
        }
        context = getattr(record, 'context', None)
        if context:
            entry['context'] = context
        if record.exc_info:
            entry['exception'] = self.formatException(record.exc_info)
        return json.dumps(entry, default=str)


class ProgressTracker:
    """
    Counts work units of one long operation (training iterations, closed-loop
    starts, sweep cells) and logs throughput alongside the counters.
    """

    def __init__(self, logger: Optional[logging.Logger] = None, unit: str = "items"):
        self.logger = logger or logging.getLogger(ROOT_LOGGER)
        self.unit = unit
        self.current_operation: Optional[str] = None
        self.total_items = 0
        self.processed_items = 0
        self.failed_items = 0
        self.start_time: Optional[datetime] = None
        self._clock = 0.0

    def _elapsed(self) -> float:
        return time.perf_counter() - self._clock if self.start_time else 0.0

    def start_operation(self, operation_name: str, total_items: int = 0) -> None:
        self.current_operation = operation_name
        self.total_items = total_items
        self.processed_items = 0
        self.failed_items = 0
        self.start_time = datetime.now()
        self._clock = time.perf_counter()
        self.logger.info(f"Starting {operation_name}", extra={'context': {
            'operation': operation_name, 'total': total_items, 'unit': self.unit}})

    def update_progress(self, processed: int = 1, failed: int = 0,
                        context: Optional[Dict[str, Any]] = None) -> None:
        """Advance the counters; ``context`` is merged into the log record."""
        self.processed_items += processed
        self.failed_items += failed
        elapsed = self._elapsed()
        rate = self.processed_items / elapsed if elapsed > 0 else 0.0
        record: Dict[str, Any] = {
            'operation': self.current_operation,
            'processed': self.processed_items,
            'failed': self.failed_items,
            'per_second': rate,
        }
        record.update(context or {})
        if self.total_items > 0:
            percent = 100.0 * self.processed_items / self.total_items
            remaining = max(self.total_items - self.processed_items, 0)
            record.update({'total': self.total_items, 'progress_percent': percent,
                           'eta_seconds': remaining / rate if rate > 0 else None})
            message = (f"Progress: {self.processed_items}/{self.total_items} {self.unit} "
                       f"({percent:.1f}%)")
        else:
            message = f"Processed {self.processed_items} {self.unit} ({self.failed_items} failed)"
        self.logger.info(message, extra={'context': record})

    def complete_operation(self) -> Dict[str, Any]:
        """Log and return the summary of the current operation."""
        duration = self._elapsed()
        ok = self.processed_items - self.failed_items
        summary = {
            'operation': self.current_operation,
            'unit': self.unit,
            'total_items': self.total_items,
            'processed_items': self.processed_items,
            'failed_items': self.failed_items,
            'success_rate': 100.0 * ok / max(self.processed_items, 1),
            'duration_seconds': duration,
            'start_time': self.start_time.isoformat() if self.start_time else None,
        }
        self.logger.info(f"Finished {self.current_operation} in {duration:.1f}s",
                         extra={'context': summary})
        return summary


def configure_logging(level: str = "INFO", log_file: Optional[str] = None) -> logging.Logger:
    """
    Attach a console handler (and a rotating JSON file handler when
    ``log_file`` is given) to the package logger, replacing earlier handlers.

    Args:
        level: Logging level name
        log_file: Optional path of the structured log file

    Returns:
        logging.Logger: The configured ``cogmap`` logger
    """
    logger = logging.getLogger(ROOT_LOGGER)
    logger.setLevel(getattr(logging, level.upper(), logging.INFO))
    for handler in list(logger.handlers):
        handler.close()
    logger.handlers.clear()

    if log_file:
        log_path = Path(log_file)
        log_path.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.handlers.RotatingFileHandler(
            log_path, maxBytes=LOG_FILE_BYTES, backupCount=LOG_FILE_BACKUPS)
        file_handler.setFormatter(StructuredFormatter())
        logger.addHandler(file_handler)

    console_handler = logging.StreamHandler()
    console_handler.setFormatter(logging.Formatter(CONSOLE_FORMAT, datefmt='%Y-%m-%d %H:%M:%S'))
    logger.addHandler(console_handler)
    return logger


class LoggingService:
    """Logging service owned by the orchestrator for one command."""

    def __init__(self, config: ExperimentConfig):
        """
        Initialize the logging service.

        Args:
            config: Experiment configuration containing logging settings
        """
        self.config = config
        self.logger = configure_logging(config.logging_level, config.logging_file_path)
        self.progress_tracker = ProgressTracker(self.logger, unit="cells")
        self.operation_history: List[Dict[str, Any]] = []

    def log_info(self, message: str, context: Optional[Dict[str, Any]] = None) -> None:
        self.logger.info(message, extra={'context': context or {}})

    def log_warning(self, message: str, context: Optional[Dict[str, Any]] = None) -> None:
        self.logger.warning(message, extra={'context': context or {}})

    def start_stage(self, stage: str, total_items: int = 0) -> None:
        self.progress_tracker.start_operation(stage, total_items)

    def update_stage(self, processed: int = 1, failed: int = 0) -> None:
        self.progress_tracker.update_progress(processed, failed)

    def complete_stage(self) -> Dict[str, Any]:
        summary = self.progress_tracker.complete_operation()
        self.operation_history.append(summary)
        return summary

    def get_logger(self) -> logging.Logger:
        return self.logger

    def close(self) -> None:
        """Close all logging handlers."""
        for handler in self.logger.handlers:
            handler.close()
        self.logger.handlers.clear()
