"""
Encoder, generator and critic networks, their losses and the training loop.
"""

from .bundle import (
    NETWORKS, ModelBundle, TrainConfig, copy_params, encode, encode_distribution, generate,
    predict,
)
from .checkpoint import checkpoint_bytes, load_checkpoint, parse_checkpoint, save_checkpoint
from .losses import gan_loss, gradient_penalty, kl_prior, layer_loss, pixel_loss
from .networks import (
    Architecture, critic_feature_layer, critic_forward, encoder_forward, generator_forward,
)
from .trainer import LOSS_FIELDS, TrainingRun, checkpoint_name, train

__all__ = [
    "NETWORKS",
    "Architecture",
    "ModelBundle",
    "TrainConfig",
    "TrainingRun",
    "LOSS_FIELDS",
    "checkpoint_bytes",
    "checkpoint_name",
    "copy_params",
    "critic_feature_layer",
    "critic_forward",
    "encode",
    "encode_distribution",
    "encoder_forward",
    "gan_loss",
    "generate",
    "generator_forward",
    "gradient_penalty",
    "kl_prior",
    "layer_loss",
    "load_checkpoint",
    "parse_checkpoint",
    "pixel_loss",
    "predict",
    "save_checkpoint",
    "train",
]
