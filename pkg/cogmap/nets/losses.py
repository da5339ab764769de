"""
Training objectives: prior, reconstruction and critic terms.
"""

from typing import Callable, Dict, Optional, Tuple

import numpy as np

from ..diffengine import Tensor, grad, sq_norm
from ..models.exceptions import ShapeError

Critic = Callable[[Tensor], Tensor]

GP_POINTS = ("generated", "interpolate")


def kl_prior(mu: Tensor, logvar: Tensor) -> Tensor:
    """KL divergence of N(μ, σ²) from N(0, I): −½ Σ (1 + log σ² − μ² − σ²), averaged over the batch."""
    if mu.shape != logvar.shape:
        raise ShapeError(f"Mean {mu.shape} and log-variance {logvar.shape} differ in shape",
                         error_code="SHAPE_MISMATCH",
                         context={"mu": mu.shape, "logvar": logvar.shape})
    per_sample = (1.0 + logvar - mu * mu - logvar.exp()).sum(axis=1) * -0.5
    return per_sample.mean()


def _per_sample_sq(diff: Tensor) -> Tensor:
    return sq_norm(diff.reshape(diff.shape[0], -1), axis=(1,))


def pixel_loss(x_hat: Tensor, target: Tensor) -> Tensor:
    """½‖x̂ − x‖² summed over pixels, averaged over the batch."""
    if x_hat.shape != target.shape:
        raise ShapeError(f"Prediction {x_hat.shape} and target {target.shape} differ in shape",
                         error_code="SHAPE_MISMATCH",
                         context={"prediction": x_hat.shape, "target": target.shape})
    return (_per_sample_sq(x_hat - target) * 0.5).mean()


def layer_loss(features: Callable[[Tensor], Tensor], x_hat: Tensor, target: Tensor) -> Tensor:
    """½‖Dis_l(x) − Dis_l(x̂)‖² over the critic's middle-layer activations, averaged over the batch."""
    if x_hat.shape != target.shape:
        raise ShapeError(f"Prediction {x_hat.shape} and target {target.shape} differ in shape",
                         error_code="SHAPE_MISMATCH",
                         context={"prediction": x_hat.shape, "target": target.shape})
    return (_per_sample_sq(features(target) - features(x_hat)) * 0.5).mean()


def gradient_penalty(critic: Critic, point: Tensor) -> Tuple[Tensor, Tensor]:
    """
    Mean of (‖∇ₓ critic(x)‖ − 1)² over the batch at ``point``.

    The input gradient is recorded, so the penalty can be differentiated
    with respect to the critic's parameters.

    Returns:
        Tuple of (penalty, critic scores at ``point``)
    """
    scores = critic(point)
    g = grad(scores.sum(), [point], create_graph=True)[0]
    norms = _per_sample_sq(g).sqrt()
    return ((norms - 1.0) ** 2).mean(), scores


def gan_loss(critic: Critic, x_real: Tensor, x_hat: Tensor, penalty_weight: float = 10.0,
             gp_point: str = "generated",
             rng: Optional[np.random.Generator] = None) -> Tuple[Tensor, Dict[str, float]]:
    """
    Critic objective mean Dis(x̂) − mean Dis(x) + λ·penalty.

    Args:
        critic: Maps an image batch to one score per image
        x_real: Target images x(t+τ)
        x_hat: Generated images (treated as constants)
        penalty_weight: λ
        gp_point: ``generated`` evaluates the penalty at x̂; ``interpolate``
            at random points between x and x̂
        rng: Source of interpolation weights

    Returns:
        Tuple of (loss, float components for logging)
    """
    if x_hat.shape != x_real.shape:
        raise ShapeError(f"Generated {x_hat.shape} and real {x_real.shape} batches differ in shape",
                         error_code="SHAPE_MISMATCH",
                         context={"generated": x_hat.shape, "real": x_real.shape})
    if gp_point not in GP_POINTS:
        raise ValueError(f"gp_point must be one of {GP_POINTS}, got '{gp_point}'")

    fake = Tensor(x_hat.data, requires_grad=True, dtype=x_hat.dtype)
    real_scores = critic(x_real)
    if gp_point == "generated":
        penalty, fake_scores = gradient_penalty(critic, fake)
    else:
        rng = rng or np.random.default_rng()
        weight = rng.random((x_real.shape[0],) + (1,) * (x_real.ndim - 1)).astype(x_real.dtype)
        mixed = weight * x_real.data + (1.0 - weight) * x_hat.data
        penalty, _ = gradient_penalty(critic, Tensor(mixed, requires_grad=True, dtype=x_real.dtype))
        fake_scores = critic(fake)

    wasserstein = fake_scores.mean() - real_scores.mean()
    loss = wasserstein + penalty * penalty_weight
    return loss, {
        'critic_loss': loss.item(),
        'wasserstein': wasserstein.item(),
        'penalty': penalty.item(),
    }
