"""
Model bundles: the three parameter sets plus the training condition.
"""

from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional, Union

import numpy as np

from ..diffengine import OptimState, Tensor, no_grad
from ..models.config import Variant
from ..models.exceptions import ConfigurationError
from .networks import (
    Architecture, critic_forward, encoder_forward, generator_forward, init_critic, init_encoder,
    init_generator,
)

NETWORKS = ("enc", "gen", "dis")


@dataclass
class TrainConfig:
    """Training schedule."""

    batch_size: int = 64
    iterations: int = 10000
    critic_steps: int = 5
    learning_rate: float = 2e-4
    beta1: float = 0.0
    beta2: float = 0.9
    eps: float = 1e-8
    checkpoint_interval: int = 500
    log_interval: int = 100
    gp_point: str = "generated"

    def validate(self) -> None:
        problems = [name for name in ("batch_size", "iterations", "critic_steps",
                                      "checkpoint_interval", "log_interval")
                    if int(getattr(self, name)) < 1]
        if self.learning_rate <= 0:
            problems.append("learning_rate")
        if self.gp_point not in ("generated", "interpolate"):
            problems.append("gp_point")
        if problems:
            raise ConfigurationError(
                f"Invalid training settings: {', '.join(problems)}",
                error_code="BAD_TRAIN_CONFIG",
                context={"fields": problems},
            )


@dataclass
class ModelBundle:
    """Encoder, generator and critic parameters with their training condition."""

    arch: Architecture
    variant: Variant
    tau: int
    alpha: float
    penalty_weight: float
    seed: int
    enc: Dict[str, Tensor]
    gen: Dict[str, Tensor]
    dis: Dict[str, Tensor]
    stats: Dict[str, np.ndarray]
    iteration: int = 0
    optim: Dict[str, OptimState] = field(default_factory=dict)

    @classmethod
    def create(cls, arch: Architecture, variant: Variant = Variant.VAE, tau: int = 0,
               alpha: float = 1.0, penalty_weight: float = 10.0, seed: int = 1) -> "ModelBundle":
        """Freshly initialized bundle; the layer-loss variant always uses α = 1."""
        rng = np.random.default_rng(seed)
        enc = init_encoder(arch, rng)
        gen, stats = init_generator(arch, rng)
        dis = init_critic(arch, rng)
        if variant is Variant.VAEGAN_LAYER:
            alpha = 1.0
        bundle = cls(arch=arch, variant=variant, tau=int(tau), alpha=float(alpha),
                     penalty_weight=float(penalty_weight), seed=int(seed),
                     enc=enc, gen=gen, dis=dis, stats=stats)
        bundle.optim = {name: OptimState.for_params(bundle.params(name)) for name in NETWORKS}
        return bundle

    @property
    def zdim(self) -> int:
        return self.arch.zdim

    @property
    def trains_critic(self) -> bool:
        """The critic is trained for the layer variant, and for the pixel variant when α > 0."""
        if self.variant is Variant.VAEGAN_LAYER:
            return True
        return self.variant is Variant.VAEGAN_PIXEL and self.alpha > 0

    def params(self, network: str) -> Dict[str, Tensor]:
        return {"enc": self.enc, "gen": self.gen, "dis": self.dis}[network]

    def all_params(self) -> Dict[str, Tensor]:
        merged: Dict[str, Tensor] = {}
        for network in NETWORKS:
            merged.update(self.params(network))
        return merged

    def snapshot(self) -> Dict[str, np.ndarray]:
        """Copies of every parameter and running statistic."""
        values = {name: p.data.copy() for name, p in self.all_params().items()}
        values.update({name: s.copy() for name, s in self.stats.items()})
        return values

    def critic(self, x: Tensor) -> Tensor:
        return critic_forward(self.dis, x, self.arch)[0]

    def critic_features(self, x: Tensor) -> Tensor:
        return critic_forward(self.dis, x, self.arch)[1]


def _as_tensor(images: Union[np.ndarray, Tensor]) -> Tensor:
    if isinstance(images, Tensor):
        return images
    return Tensor(np.asarray(images, dtype=np.float32), dtype=np.float32)


def encode_distribution(bundle: ModelBundle, images: Union[np.ndarray, Tensor]):
    """Posterior mean and log-variance arrays for an image batch."""
    with no_grad():
        mu, logvar = encoder_forward(bundle.enc, _as_tensor(images), bundle.arch)
    return mu.data, logvar.data


def encode(bundle: ModelBundle, images: Union[np.ndarray, Tensor], mode: str = "mean",
           rng: Optional[np.random.Generator] = None, samples: int = 1) -> np.ndarray:
    """
    Latent codes for an image batch in [−1, 1].

    Args:
        bundle: Trained or freshly initialized bundle
        images: (N, 3, S, S) batch
        mode: ``mean`` returns μ; ``sample`` returns μ + σ⊙ε
        rng: Noise source for ``sample`` mode (defaults to one seeded by the bundle seed)
        samples: Number of draws per image in ``sample`` mode

    Returns:
        (N, d_z) array, or (samples, N, d_z) when ``samples`` > 1

    Raises:
        ShapeError: If the batch does not match the bundle's image size
    """
    if mode not in ("mean", "sample"):
        raise ValueError(f"mode must be 'mean' or 'sample', got '{mode}'")
    mu, logvar = encode_distribution(bundle, images)
    if mode == "mean":
        return mu
    rng = rng or np.random.default_rng(bundle.seed)
    sigma = np.exp(0.5 * logvar)
    eps = rng.standard_normal((samples,) + mu.shape).astype(mu.dtype)
    z = mu[None] + sigma[None] * eps
    return z[0] if samples == 1 else z


def generate(bundle: ModelBundle, z: Union[np.ndarray, Tensor]) -> np.ndarray:
    """Images from latents with batch-norm in evaluation mode."""
    with no_grad():
        out = generator_forward(bundle.gen, bundle.stats, _as_tensor(z), bundle.arch, training=False)
    return out.data


def predict(bundle: ModelBundle, images: Union[np.ndarray, Tensor]) -> np.ndarray:
    """Gen(Enc_mean(x)): the deterministic prediction of the frame τ steps ahead."""
    return generate(bundle, encode(bundle, images, "mean"))


def copy_params(params: Mapping[str, Tensor]) -> Dict[str, np.ndarray]:
    return {name: p.data.copy() for name, p in params.items()}
