"""
Closed-loop dynamics: autonomous rollouts and their classification.
"""

from .classify import (
    Classification, ClassifierConfig, TrajectoryType, classifier_config, classify, inspect_run,
)
from .closed_loop import ClosedLoopRun, closed_loop, closed_loop_many, default_starts
from .lyapunov import LyapunovConfig, LyapunovEstimate, divergence_curve, lyapunov_rosenstein
from .report import (
    FRACTION_FIELDS, RUN_FIELDS, SUMMARY_FIELDS, DynamicsReport, RunRecord, aggregate,
    label_fractions, record_run, rollout_dump, rollout_name,
)

__all__ = [
    "Classification",
    "ClassifierConfig",
    "TrajectoryType",
    "classifier_config",
    "classify",
    "inspect_run",
    "ClosedLoopRun",
    "closed_loop",
    "closed_loop_many",
    "default_starts",
    "LyapunovConfig",
    "LyapunovEstimate",
    "divergence_curve",
    "lyapunov_rosenstein",
    "FRACTION_FIELDS",
    "RUN_FIELDS",
    "SUMMARY_FIELDS",
    "DynamicsReport",
    "RunRecord",
    "aggregate",
    "label_fractions",
    "record_run",
    "rollout_dump",
    "rollout_name",
]
