"""
Data models for pipeline stage results.
"""

from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from typing import Any, Dict, List


class StageStatus(Enum):
    """Status enumeration for pipeline stages."""
    SUCCESS = "success"
    FAILED = "failed"
    PARTIAL = "partial"
    SKIPPED = "skipped"
    IN_PROGRESS = "in_progress"


@dataclass
class StageResult:
    """Result of one pipeline stage (dataset, training, analysis, ...) for one grid cell."""

    stage: str
    cell: str
    success: bool = True
    items_processed: int = 0
    items_failed: int = 0
    error_messages: List[str] = field(default_factory=list)
    artifacts: List[str] = field(default_factory=list)
    execution_time: float = 0.0
    timestamp: datetime = field(default_factory=datetime.now)
    status: StageStatus = StageStatus.SUCCESS
    metadata: Dict[str, Any] = field(default_factory=dict)

    def add_error(self, error_message: str) -> None:
        """Add an error message to the result."""
        self.error_messages.append(error_message)
        self.items_failed += 1
        if self.items_processed > 0:
            self.status = StageStatus.PARTIAL
        else:
            self.status = StageStatus.FAILED
            self.success = False

    def to_dict(self) -> Dict[str, Any]:
        return {
            'stage': self.stage,
            'cell': self.cell,
            'success': self.success,
            'status': self.status.value,
            'items_processed': self.items_processed,
            'items_failed': self.items_failed,
            'error_messages': list(self.error_messages),
            'artifacts': list(self.artifacts),
            'execution_time': self.execution_time,
            'timestamp': self.timestamp.isoformat(),
            'metadata': self.metadata,
        }


@dataclass
class ExperimentReport:
    """Report over every stage run by one command."""

    start_time: datetime
    end_time: datetime
    total_stages: int = 0
    successful_stages: int = 0
    failed_stages: int = 0
    partial_stages: int = 0
    skipped_stages: int = 0
    total_execution_time: float = 0.0
    results: List[StageResult] = field(default_factory=list)

    @property
    def success_rate(self) -> float:
        """Calculate the overall success rate."""
        if self.total_stages == 0:
            return 0.0
        return ((self.successful_stages + self.skipped_stages) / self.total_stages) * 100

    @property
    def overall_status(self) -> StageStatus:
        if self.failed_stages == 0 and self.partial_stages == 0:
            return StageStatus.SUCCESS
        if self.successful_stages + self.skipped_stages + self.partial_stages == 0:
            return StageStatus.FAILED
        return StageStatus.PARTIAL

    def add_result(self, result: StageResult) -> None:
        """Add a stage result to the report."""
        self.results.append(result)
        self.total_stages += 1
        if result.status == StageStatus.SUCCESS:
            self.successful_stages += 1
        elif result.status == StageStatus.FAILED:
            self.failed_stages += 1
        elif result.status == StageStatus.PARTIAL:
            self.partial_stages += 1
        elif result.status == StageStatus.SKIPPED:
            self.skipped_stages += 1
