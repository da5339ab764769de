"""
Tukey's honestly-significant-difference test.

Tail probabilities and critical values of the studentized range come from
``scipy.stats.studentized_range`` (numerical integration).
"""

import itertools
import logging
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np
from scipy import stats

from ..models.exceptions import AnalysisError

logger = logging.getLogger(__name__)


def _check_range_args(k: int, df: int) -> None:
    if k < 2 or df < 1:
        raise AnalysisError(f"Studentized range needs k >= 2 and df >= 1 (got k={k}, df={df})",
                            error_code="BAD_ARGUMENT", context={"k": k, "df": df})


def studentized_range_sf(q: float, k: int, df: int) -> float:
    """P(Q ≥ q) for the studentized range with ``k`` groups and ``df`` degrees of freedom."""
    _check_range_args(k, df)
    return float(np.clip(stats.studentized_range.sf(q, k, df), 0.0, 1.0))


def studentized_range_quantile(alpha: float, k: int, df: int) -> float:
    """Critical value q with P(Q > q) = ``alpha``."""
    if not 0.0 < alpha < 1.0:
        raise AnalysisError(f"alpha must lie in (0, 1), got {alpha}", error_code="BAD_ARGUMENT",
                            context={"alpha": alpha})
    _check_range_args(k, df)
    return float(stats.studentized_range.ppf(1.0 - alpha, k, df))


@dataclass(frozen=True)
class PairComparison:
    group_a: int
    group_b: int
    mean_difference: float
    q_statistic: float
    p_value: float


@dataclass
class TukeyResult:
    comparisons: List[PairComparison]
    mse: float
    df: int

    def p_value(self, a: int, b: int) -> float:
        a, b = min(a, b), max(a, b)
        for c in self.comparisons:
            if (c.group_a, c.group_b) == (a, b):
                return c.p_value
        raise KeyError((a, b))


def tukey_hsd(groups: Sequence[Sequence[float]]) -> TukeyResult:
    """
    Pairwise comparisons of group means (Tukey–Kramer for unequal sizes).

    Args:
        groups: One sample per group, at least two groups

    Returns:
        TukeyResult: One comparison per unordered pair (a < b)

    Raises:
        AnalysisError: With fewer than two groups, a group of fewer than two
            samples, or zero within-group variance
    """
    samples = [np.asarray(g, dtype=np.float64).ravel() for g in groups]
    if len(samples) < 2:
        raise AnalysisError("Tukey's test needs at least two groups", error_code="TOO_FEW_GROUPS",
                            context={"groups": len(samples)})
    small = [i for i, s in enumerate(samples) if s.size < 2]
    if small:
        raise AnalysisError("Every group needs at least two samples", error_code="TOO_FEW_SAMPLES",
                            context={"groups": small})
    if any(not np.all(np.isfinite(s)) for s in samples):
        raise AnalysisError("Groups contain non-finite values", error_code="NON_FINITE")

    k = len(samples)
    sizes = np.array([s.size for s in samples])
    means = np.array([s.mean() for s in samples])
    df = int(sizes.sum() - k)
    mse = float(sum(((s - s.mean()) ** 2).sum() for s in samples) / df)
    if mse <= 0.0:
        raise AnalysisError("Within-group variance is zero; Tukey's test is undefined",
                            error_code="DEGENERATE", context={"groups": k})

    comparisons = []
    for a, b in itertools.combinations(range(k), 2):
        diff = means[a] - means[b]
        se = np.sqrt(0.5 * mse * (1.0 / sizes[a] + 1.0 / sizes[b]))
        q = abs(diff) / se
        comparisons.append(PairComparison(a, b, float(diff), float(q),
                                          studentized_range_sf(q, k, df)))
    logger.debug("Tukey HSD", extra={'context': {'groups': k, 'df': df, 'mse': mse}})
    return TukeyResult(comparisons=comparisons, mse=mse, df=df)
