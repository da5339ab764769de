"""
GAN-weight sweep: one bundle per (α, seed), each reduced to three metrics.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, List, Optional, Sequence

from ..mazeworld import MazeDataset
from ..models.config import Variant
from ..nets import Architecture, ModelBundle, TrainConfig, train
from ..services.logging import ProgressTracker
from .metrics import BundleMetrics, analyze_bundle, average_metrics, in_window

logger = logging.getLogger(__name__)

SWEEP_FIELDS = ("alpha", "seed", "r_input", "r_target", "s_pca", "d_lr")


@dataclass(frozen=True)
class SweepRow:
    alpha: float
    seed: int
    r_input: float
    r_target: float
    s_pca: float
    d_lr: float

    def to_dict(self) -> dict:
        return {name: getattr(self, name) for name in SWEEP_FIELDS}


def train_and_measure(dataset: MazeDataset, bundle: ModelBundle, config: TrainConfig,
                      window: float = 0.2, checkpoint_dir: Optional[Path] = None,
                      loss_csv: Optional[Path] = None) -> List[BundleMetrics]:
    """Train ``bundle`` and analyze it at every checkpoint inside the analysis window."""
    collected: List[BundleMetrics] = []

    def measure(trained: ModelBundle, _path: Optional[Path]) -> None:
        if in_window(trained.iteration, config.iterations, window):
            collected.append(analyze_bundle(trained, dataset))

    train(dataset, bundle, config, checkpoint_dir=checkpoint_dir, loss_csv=loss_csv,
          on_checkpoint=measure)
    return collected


def alpha_sweep(dataset: MazeDataset, alphas: Sequence[float], seeds: Sequence[int],
                config: TrainConfig, tau: int = 5, arch: Optional[Architecture] = None,
                variant: Variant = Variant.VAEGAN_PIXEL, penalty_weight: float = 10.0,
                window: float = 0.2,
                checkpoint_root: Optional[Callable[[float, int], Path]] = None) -> List[SweepRow]:
    """
    Train one bundle per (α, seed) at offset ``tau`` and report r_target,
    S_PCA and d_LR averaged over the analysis window.

    Args:
        dataset: Training frames
        alphas: GAN weights; α = 0 trains no critic
        seeds: Replicate seeds
        config: Training schedule
        tau: Prediction offset
        arch: Network shape (64-wide ladder at the dataset's frame size by default)
        variant: Model variant trained at every α
        penalty_weight: λ
        window: Fraction of the final iterations averaged over
        checkpoint_root: Maps (α, seed) to a checkpoint directory; no checkpoints when None

    Returns:
        List[SweepRow]: Rows ordered by α, then seed
    """
    arch = arch or Architecture(image_size=dataset.size)
    tracker = ProgressTracker(logger, unit="cells")
    tracker.start_operation(f"alpha sweep tau={tau}", len(alphas) * len(seeds))
    rows = []
    for alpha in alphas:
        for seed in seeds:
            bundle = ModelBundle.create(arch, variant, tau=tau, alpha=alpha,
                                        penalty_weight=penalty_weight, seed=seed)
            ckpt = checkpoint_root(alpha, seed) if checkpoint_root else None
            averaged = average_metrics(train_and_measure(dataset, bundle, config, window, ckpt))
            rows.append(SweepRow(alpha=float(alpha), seed=int(seed), **averaged.scalars()))
            tracker.update_progress(context={'alpha': alpha, 'seed': seed, **averaged.scalars()})
    tracker.complete_operation()
    return rows
