"""
Per-run labels, trajectory-type fractions per condition and rollout image dumps.
"""

import logging
import math
from collections import Counter, OrderedDict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..models.exceptions import ClassificationError
from ..services.artifacts import save_png, to_uint8, write_csv
from .classify import ClassifierConfig, TrajectoryType, inspect_run
from .closed_loop import ClosedLoopRun

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

RUN_FIELDS = ("variant", "tau", "zdim", "seed", "start_index", "label", "lyapunov")
LABELS = tuple(t.value for t in TrajectoryType)
FRACTION_FIELDS = ("variant", "tau", "zdim", "seed", "runs") + LABELS
SUMMARY_FIELDS = (("variant", "tau", "zdim", "seeds")
                  + tuple(f"{label}_{stat}" for label in LABELS for stat in ("mean", "std")))


@dataclass(frozen=True)
class RunRecord:
    variant: str
    tau: int
    zdim: int
    seed: int
    start_index: int
    label: TrajectoryType
    lyapunov: float = math.nan

    @property
    def condition(self) -> Tuple[str, int, int]:
        return (self.variant, self.tau, self.zdim)

    def to_dict(self) -> Dict[str, object]:
        return {'variant': self.variant, 'tau': self.tau, 'zdim': self.zdim, 'seed': self.seed,
                'start_index': self.start_index, 'label': self.label.value,
                'lyapunov': self.lyapunov}

    @classmethod
    def from_dict(cls, row: Dict[str, str]) -> "RunRecord":
        return cls(variant=row['variant'], tau=int(row['tau']), zdim=int(row['zdim']),
                   seed=int(row['seed']), start_index=int(row['start_index']),
                   label=TrajectoryType.parse(row['label']),
                   lyapunov=float(row['lyapunov']) if row.get('lyapunov') else math.nan)


def record_run(run: ClosedLoopRun, config: ClassifierConfig = ClassifierConfig()) -> RunRecord:
    """Classify one run into a report row."""
    result = inspect_run(run, config)
    return RunRecord(variant=run.variant.value, tau=run.tau, zdim=run.zdim, seed=run.seed,
                     start_index=run.start_index, label=result.label, lyapunov=result.lyapunov)


@dataclass
class DynamicsReport:
    """Run labels with their fractions per seed and per condition."""

    records: List[RunRecord]
    fractions: List[Dict[str, object]] = field(default_factory=list)
    summary: List[Dict[str, object]] = field(default_factory=list)
    merged_undetermined: bool = False

    def fraction(self, variant: str, tau: int, label: TrajectoryType,
                 zdim: Optional[int] = None) -> float:
        """Seed-mean fraction of ``label`` for one condition."""
        for row in self.summary:
            if row['variant'] == variant and row['tau'] == tau and (zdim is None or row['zdim'] == zdim):
                return float(row[f"{label.value}_mean"])
        raise ClassificationError(f"No runs for {variant} tau={tau}", error_code="UNKNOWN_CONDITION",
                                  context={"variant": variant, "tau": tau, "zdim": zdim})

    def write(self, out_dir: PathLike) -> List[Path]:
        out_dir = Path(out_dir)
        return [
            write_csv(out_dir / "dream_runs.csv", RUN_FIELDS, (r.to_dict() for r in self.records)),
            write_csv(out_dir / "dream_fractions.csv", FRACTION_FIELDS, self.fractions),
            write_csv(out_dir / "dream_summary.csv", SUMMARY_FIELDS, self.summary),
        ]


def label_fractions(labels: Iterable[TrajectoryType]) -> Dict[str, float]:
    counts = Counter(labels)
    total = sum(counts.values())
    if total == 0:
        raise ClassificationError("No runs to aggregate", error_code="EMPTY")
    return {t.value: counts.get(t, 0) / total for t in TrajectoryType}


def aggregate(records: Sequence[RunRecord], merge_undetermined: bool = False) -> DynamicsReport:
    """
    Label fractions per (variant, τ, d_z, seed), then their mean and standard
    deviation over seeds per (variant, τ, d_z).

    Args:
        records: Classified runs
        merge_undetermined: Count Undetermined runs as LimitCycle

    Returns:
        DynamicsReport: Fractions of each seed sum to one

    Raises:
        ClassificationError: If ``records`` is empty
    """
    if not records:
        raise ClassificationError("No runs to aggregate", error_code="EMPTY")
    if merge_undetermined:
        records = [RunRecord(r.variant, r.tau, r.zdim, r.seed, r.start_index,
                             TrajectoryType.LIMIT_CYCLE
                             if r.label is TrajectoryType.UNDETERMINED else r.label,
                             r.lyapunov) for r in records]

    by_seed: "OrderedDict[Tuple, List[TrajectoryType]]" = OrderedDict()
    for r in sorted(records, key=lambda r: (r.variant, r.tau, r.zdim, r.seed, r.start_index)):
        by_seed.setdefault(r.condition + (r.seed,), []).append(r.label)

    fractions = []
    by_condition: "OrderedDict[Tuple, List[Dict[str, float]]]" = OrderedDict()
    for (variant, tau, zdim, seed), labels in by_seed.items():
        shares = label_fractions(labels)
        fractions.append({'variant': variant, 'tau': tau, 'zdim': zdim, 'seed': seed,
                          'runs': len(labels), **shares})
        by_condition.setdefault((variant, tau, zdim), []).append(shares)

    summary = []
    for (variant, tau, zdim), seeds in by_condition.items():
        row: Dict[str, object] = {'variant': variant, 'tau': tau, 'zdim': zdim, 'seeds': len(seeds)}
        for label in LABELS:
            values = np.array([s[label] for s in seeds])
            row[f"{label}_mean"] = float(values.mean())
            row[f"{label}_std"] = float(values.std())
        summary.append(row)

    logger.info("Aggregated closed-loop runs", extra={'context': {
        'runs': len(records), 'conditions': len(summary), 'merge_undetermined': merge_undetermined}})
    return DynamicsReport(records=list(records), fractions=fractions, summary=summary,
                          merged_undetermined=merge_undetermined)


def rollout_name(start_index: int, iteration: int) -> str:
    return f"rollout_s{start_index:03d}_i{iteration:03d}.png"


def rollout_dump(run: ClosedLoopRun, start: int = 180, end: int = 200,
                 out_dir: PathLike = ".") -> List[Path]:
    """
    Write the images of iterations ``start``..``end`` (inclusive) as PNGs.

    Raises:
        ClassificationError: If part of the range was not kept by the run
    """
    if start > end:
        raise ClassificationError("Rollout range is empty", error_code="BAD_ARGUMENT",
                                  context={"start": start, "end": end})
    out_dir = Path(out_dir)
    return [save_png(to_uint8(run.image(i)), out_dir / rollout_name(run.start_index, i))
            for i in range(start, end + 1)]
