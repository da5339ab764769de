"""
Training loop for the VAE and VAE/GAN variants.

Each iteration draws its randomness from ``default_rng([seed, iteration])``,
so a run resumed from a checkpoint continues exactly like an uninterrupted
one. Update routing: the critic minimizes the critic objective; the encoder
receives the prior and reconstruction terms; the generator receives the
reconstruction term plus α times the adversarial term −mean Dis(x̂).
"""

import csv
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from ..diffengine import Tensor, adam_step, grad, no_grad
from ..models.config import Variant
from ..models.exceptions import NonFiniteError, TrainingError
from ..mazeworld import MazeDataset
from ..services.artifacts import format_cell
from ..services.logging import ProgressTracker
from .bundle import ModelBundle, TrainConfig
from .checkpoint import save_checkpoint
from .losses import gan_loss, kl_prior, layer_loss, pixel_loss
from .networks import encoder_forward, generator_forward

logger = logging.getLogger(__name__)

LOSS_FIELDS = ("iteration", "prior", "reconstruction", "adversarial", "critic_loss",
               "wasserstein", "penalty")


@dataclass
class TrainingRun:
    """Outcome of one call to ``train``."""

    checkpoints: List[Path] = field(default_factory=list)
    losses: List[Dict[str, float]] = field(default_factory=list)
    execution_time: float = 0.0


def checkpoint_name(iteration: int) -> str:
    return f"ckpt_{iteration:06d}.cgmp"


class LossLog:
    """Per-iteration loss CSV; on resume, rows after the restart point are dropped."""

    def __init__(self, path: Optional[Path], start_iteration: int):
        self.path = path
        if path is None:
            return
        path.parent.mkdir(parents=True, exist_ok=True)
        kept: List[Dict[str, str]] = []
        if start_iteration > 0 and path.exists():
            with open(path, newline="") as handle:
                kept = [row for row in csv.DictReader(handle)
                        if int(row["iteration"]) <= start_iteration]
        with open(path, "w", newline="") as handle:
            writer = csv.DictWriter(handle, fieldnames=LOSS_FIELDS)
            writer.writeheader()
            writer.writerows(kept)

    def append(self, record: Dict[str, float]) -> None:
        if self.path is None:
            return
        with open(self.path, "a", newline="") as handle:
            csv.DictWriter(handle, fieldnames=LOSS_FIELDS).writerow(
                {k: format_cell(record.get(k, "")) for k in LOSS_FIELDS})


def _batch(images: np.ndarray, tau: int, batch_size: int,
           rng: np.random.Generator) -> Tuple[Tensor, Tensor]:
    """Random (x(t), x(t+τ)) pairs; t never crosses the end of the sequence."""
    t = rng.integers(0, images.shape[0] - tau, size=batch_size)
    return (Tensor(images[t], dtype=np.float32),
            Tensor(images[t + tau], dtype=np.float32))


def _reparameterize(mu: Tensor, logvar: Tensor, rng: np.random.Generator) -> Tensor:
    eps = Tensor(rng.standard_normal(mu.shape).astype(np.float32), dtype=np.float32)
    return mu + (logvar * 0.5).exp() * eps


def _named(params: Dict[str, Tensor], grads: List[Tensor]) -> Dict[str, np.ndarray]:
    return {name: g.data for name, g in zip(params, grads)}


def critic_step(bundle: ModelBundle, images: np.ndarray, config: TrainConfig,
                rng: np.random.Generator) -> Dict[str, float]:
    """One critic update on a fresh batch; generator batch-norm statistics are left untouched."""
    x, target = _batch(images, bundle.tau, config.batch_size, rng)
    with no_grad():
        mu, logvar = encoder_forward(bundle.enc, x, bundle.arch)
        z = _reparameterize(mu, logvar, rng)
        scratch = {k: v.copy() for k, v in bundle.stats.items()}
        x_hat = generator_forward(bundle.gen, scratch, z, bundle.arch, training=True)
    loss, parts = gan_loss(bundle.critic, target, x_hat, bundle.penalty_weight,
                           config.gp_point, rng)
    grads = grad(loss, list(bundle.dis.values()))
    adam_step(bundle.dis, _named(bundle.dis, grads), bundle.optim["dis"])
    return parts


def encoder_generator_step(bundle: ModelBundle, images: np.ndarray, config: TrainConfig,
                           rng: np.random.Generator) -> Dict[str, float]:
    """One encoder/generator update; critic parameters are not touched."""
    x, target = _batch(images, bundle.tau, config.batch_size, rng)
    mu, logvar = encoder_forward(bundle.enc, x, bundle.arch)
    z = _reparameterize(mu, logvar, rng)
    x_hat = generator_forward(bundle.gen, bundle.stats, z, bundle.arch, training=True)

    prior = kl_prior(mu, logvar)
    if bundle.variant is Variant.VAEGAN_LAYER:
        recon = layer_loss(bundle.critic_features, x_hat, target)
    else:
        recon = pixel_loss(x_hat, target)

    enc_names, gen_names = list(bundle.enc), list(bundle.gen)
    inputs = list(bundle.enc.values()) + list(bundle.gen.values())
    grads = grad(prior + recon, inputs)
    enc_grads = dict(zip(enc_names, (g.data for g in grads[:len(enc_names)])))
    gen_grads = dict(zip(gen_names, (g.data for g in grads[len(enc_names):])))

    record = {'prior': prior.item(), 'reconstruction': recon.item()}
    if bundle.trains_critic:
        adversarial = bundle.critic(x_hat).mean() * -1.0
        adv_grads = grad(adversarial * bundle.alpha, list(bundle.gen.values()))
        for name, g in zip(gen_names, adv_grads):
            gen_grads[name] = gen_grads[name] + g.data
        record['adversarial'] = adversarial.item()

    adam_step(bundle.enc, enc_grads, bundle.optim["enc"])
    adam_step(bundle.gen, gen_grads, bundle.optim["gen"])
    return record


def _configure_optimizers(bundle: ModelBundle, config: TrainConfig) -> None:
    for state in bundle.optim.values():
        state.lr = config.learning_rate
        state.beta1 = config.beta1
        state.beta2 = config.beta2
        state.eps = config.eps


def train(dataset: MazeDataset, bundle: ModelBundle, config: TrainConfig,
          variant: Optional[Variant] = None, checkpoint_dir: Optional[Path] = None,
          loss_csv: Optional[Path] = None,
          on_checkpoint: Optional[Callable[[ModelBundle, Optional[Path]], None]] = None,
          ) -> TrainingRun:
    """
    Train ``bundle`` in place from ``bundle.iteration`` up to ``config.iterations``.

    Args:
        dataset: Training frames
        bundle: Fresh or resumed bundle
        config: Training schedule
        variant: Overrides the bundle's variant when given
        checkpoint_dir: Where checkpoints are written (skipped when None)
        loss_csv: Per-iteration loss file (skipped when None)
        on_checkpoint: Called at every checkpoint iteration with the written
            path (None when no directory is given)

    Returns:
        TrainingRun with checkpoint paths and the loss records of this call

    Raises:
        TrainingError: If the dataset is too short for τ or a loss diverges
    """
    config.validate()
    if variant is not None:
        bundle.variant = variant
        if variant is Variant.VAEGAN_LAYER:
            bundle.alpha = 1.0
    if len(dataset) <= bundle.tau:
        raise TrainingError(
            f"Dataset of {len(dataset)} frames is too short for tau={bundle.tau}",
            error_code="DATASET_TOO_SHORT",
            context={"frames": len(dataset), "tau": bundle.tau},
        )
    _configure_optimizers(bundle, config)

    images = dataset.images()
    run = TrainingRun()
    log = LossLog(loss_csv, bundle.iteration)
    start = time.time()
    tracker = ProgressTracker(logger, unit="iterations")
    tracker.start_operation(f"training {bundle.variant.value} tau={bundle.tau} seed={bundle.seed}",
                            config.iterations - bundle.iteration)
    logger.info("Starting training", extra={'context': {
        'variant': bundle.variant.value, 'tau': bundle.tau, 'zdim': bundle.zdim,
        'alpha': bundle.alpha, 'seed': bundle.seed, 'start_iteration': bundle.iteration,
        'iterations': config.iterations, 'trains_critic': bundle.trains_critic}})

    for iteration in range(bundle.iteration, config.iterations):
        rng = np.random.default_rng([bundle.seed, iteration])
        record: Dict[str, float] = {'iteration': iteration + 1}
        try:
            if bundle.trains_critic:
                for _ in range(config.critic_steps):
                    record.update(critic_step(bundle, images, config, rng))
            record.update(encoder_generator_step(bundle, images, config, rng))
        except NonFiniteError as e:
            raise TrainingError(
                f"Training diverged at iteration {iteration + 1}: {e.message}",
                error_code="DIVERGED",
                context={"iteration": iteration + 1, **e.context},
            ) from e

        bundle.iteration = iteration + 1
        run.losses.append(record)
        log.append(record)
        logger.debug("Iteration finished", extra={'context': record})
        if bundle.iteration % config.log_interval == 0:
            tracker.update_progress(config.log_interval, context=record)

        if (bundle.iteration % config.checkpoint_interval == 0
                or bundle.iteration == config.iterations):
            path = None
            if checkpoint_dir is not None:
                path = save_checkpoint(bundle,
                                       Path(checkpoint_dir) / checkpoint_name(bundle.iteration))
                run.checkpoints.append(path)
            if on_checkpoint is not None:
                on_checkpoint(bundle, path)

    tracker.complete_operation()
    run.execution_time = time.time() - start
    return run
