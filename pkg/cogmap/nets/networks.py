"""
Encoder, generator and critic networks.

Layer widths are multiples of ``base_channels`` (64 reproduces the full
size ladder). A 64-pixel input passes three stride-2 stages before the
fully-connected layer; 32- and 16-pixel inputs drop the leading stages so
that the deepest feature map is always 8×8.
"""

import math
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np

from ..diffengine import Tensor, batch_norm, conv2d, deconv2d, dense, flatten, leaky_relu
from ..models.config import SUPPORTED_SIZES
from ..models.exceptions import ShapeError

DEEPEST_EXTENT = 8
_STAGE_WIDTHS = (2, 4, 8)       # encoder/critic stride-2 stages, in multiples of base_channels
_GEN_WIDTHS = (8, 4, 2)         # generator upsampling stages
_CRITIC_FEATURE_WIDTH = 4


@dataclass(frozen=True)
class Architecture:
    """Shape of the three networks."""

    image_size: int = 64
    base_channels: int = 64
    zdim: int = 10

    def __post_init__(self) -> None:
        if self.image_size not in SUPPORTED_SIZES:
            raise ShapeError(
                f"Image size {self.image_size} not supported. Supported: {', '.join(map(str, SUPPORTED_SIZES))}",
                error_code="SHAPE_MISMATCH",
                context={"image_size": self.image_size},
            )

    @property
    def stages(self) -> int:
        return int(math.log2(self.image_size // DEEPEST_EXTENT))

    @property
    def deepest_channels(self) -> int:
        return 8 * self.base_channels


@dataclass(frozen=True)
class ConvSpec:
    name: str
    in_channels: int
    out_channels: int
    kernel: int
    stride: int
    pad: int
    batch_norm: bool = False


def conv_plan(arch: Architecture, prefix: str) -> List[ConvSpec]:
    """Convolution ladder shared by the encoder and the critic."""
    b = arch.base_channels
    plan = [ConvSpec(f"{prefix}/conv0", 3, b, 3, 1, 1)]
    channels = b
    for width in _STAGE_WIDTHS[-arch.stages:]:
        out = width * b
        index = len(plan)
        plan.append(ConvSpec(f"{prefix}/conv{index}", channels, out, 4, 2, 1))
        plan.append(ConvSpec(f"{prefix}/conv{index + 1}", out, out, 3, 1, 1))
        channels = out
    return plan


def deconv_plan(arch: Architecture) -> List[ConvSpec]:
    """Generator layers after the fully-connected projection."""
    b = arch.base_channels
    plan = []
    channels = arch.deepest_channels
    for width in _GEN_WIDTHS[-arch.stages:]:
        out = width * b
        plan.append(ConvSpec(f"gen/deconv{len(plan)}", channels, out, 4, 2, 1, batch_norm=True))
        channels = out
    plan.append(ConvSpec(f"gen/deconv{len(plan)}", channels, b, 3, 1, 1, batch_norm=True))
    plan.append(ConvSpec(f"gen/deconv{len(plan)}", b, 3, 3, 1, 1))
    return plan


def critic_feature_layer(arch: Architecture) -> str:
    """Name of the critic layer whose activation feeds the layer reconstruction loss."""
    plan = conv_plan(arch, "dis")
    strided = [spec for spec in plan if spec.stride == 2]
    for spec in strided:
        if spec.out_channels == _CRITIC_FEATURE_WIDTH * arch.base_channels:
            return spec.name
    return strided[-1].name


def _he_normal(rng: np.random.Generator, shape: Tuple[int, ...], fan_in: float) -> np.ndarray:
    return (rng.standard_normal(shape) * math.sqrt(2.0 / fan_in)).astype(np.float32)


def _param(data: np.ndarray, name: str) -> Tensor:
    return Tensor(data, requires_grad=True, dtype=np.float32, name=name)


def init_encoder(arch: Architecture, rng: np.random.Generator, prefix: str = "enc",
                 outputs: Optional[int] = None) -> Dict[str, Tensor]:
    """He-initialized convolution ladder plus a dense head (2·d_z outputs by default)."""
    params: Dict[str, Tensor] = {}
    for spec in conv_plan(arch, prefix):
        shape = (spec.out_channels, spec.in_channels, spec.kernel, spec.kernel)
        params[f"{spec.name}/W"] = _param(_he_normal(rng, shape, spec.in_channels * spec.kernel ** 2),
                                          f"{spec.name}/W")
        params[f"{spec.name}/b"] = _param(np.zeros(spec.out_channels, np.float32), f"{spec.name}/b")
    features = arch.deepest_channels * DEEPEST_EXTENT ** 2
    width = 2 * arch.zdim if outputs is None else outputs
    params[f"{prefix}/fc/W"] = _param(_he_normal(rng, (features, width), features), f"{prefix}/fc/W")
    params[f"{prefix}/fc/b"] = _param(np.zeros(width, np.float32), f"{prefix}/fc/b")
    return params


def init_critic(arch: Architecture, rng: np.random.Generator) -> Dict[str, Tensor]:
    return init_encoder(arch, rng, prefix="dis", outputs=1)


def _bn_params(name: str, channels: int, params: Dict[str, Tensor],
               stats: Dict[str, np.ndarray]) -> None:
    params[f"{name}/gamma"] = _param(np.ones(channels, np.float32), f"{name}/gamma")
    params[f"{name}/beta"] = _param(np.zeros(channels, np.float32), f"{name}/beta")
    stats[f"{name}/running_mean"] = np.zeros(channels, np.float32)
    stats[f"{name}/running_var"] = np.ones(channels, np.float32)


def init_generator(arch: Architecture,
                   rng: np.random.Generator) -> Tuple[Dict[str, Tensor], Dict[str, np.ndarray]]:
    """He-initialized generator parameters and its batch-norm running statistics."""
    params: Dict[str, Tensor] = {}
    stats: Dict[str, np.ndarray] = {}
    features = arch.deepest_channels * DEEPEST_EXTENT ** 2
    params["gen/fc/W"] = _param(_he_normal(rng, (arch.zdim, features), arch.zdim), "gen/fc/W")
    params["gen/fc/b"] = _param(np.zeros(features, np.float32), "gen/fc/b")
    _bn_params("gen/bn_fc", arch.deepest_channels, params, stats)
    for spec in deconv_plan(arch):
        shape = (spec.in_channels, spec.out_channels, spec.kernel, spec.kernel)
        fan_in = spec.in_channels * spec.kernel ** 2 / spec.stride ** 2
        params[f"{spec.name}/W"] = _param(_he_normal(rng, shape, fan_in), f"{spec.name}/W")
        params[f"{spec.name}/b"] = _param(np.zeros(spec.out_channels, np.float32), f"{spec.name}/b")
        if spec.batch_norm:
            _bn_params(f"{spec.name}/bn", spec.out_channels, params, stats)
    return params, stats


def check_images(x: Tensor, arch: Architecture) -> None:
    expected = (3, arch.image_size, arch.image_size)
    if x.ndim != 4 or x.shape[1:] != expected:
        raise ShapeError(
            f"Expected image batch of shape (N, {', '.join(map(str, expected))}), got {x.shape}",
            error_code="SHAPE_MISMATCH",
            context={"input": x.shape, "expected": (None,) + expected},
        )


def _ladder(params: Mapping[str, Tensor], x: Tensor, arch: Architecture, prefix: str,
            tap: Optional[str] = None) -> Tuple[Tensor, Optional[Tensor]]:
    check_images(x, arch)
    h = x
    tapped = None
    for spec in conv_plan(arch, prefix):
        h = leaky_relu(conv2d(h, params[f"{spec.name}/W"], params[f"{spec.name}/b"],
                              spec.stride, spec.pad))
        if spec.name == tap:
            tapped = h
    return flatten(h), tapped


def encoder_forward(params: Mapping[str, Tensor], x: Tensor,
                    arch: Architecture) -> Tuple[Tensor, Tensor]:
    """Posterior mean and log-variance, each of shape (N, d_z)."""
    h, _ = _ladder(params, x, arch, "enc")
    out = dense(h, params["enc/fc/W"], params["enc/fc/b"])
    return out[:, :arch.zdim], out[:, arch.zdim:]


def critic_forward(params: Mapping[str, Tensor], x: Tensor,
                   arch: Architecture) -> Tuple[Tensor, Tensor]:
    """Unbounded critic score of shape (N,) and the middle-layer activation."""
    h, features = _ladder(params, x, arch, "dis", tap=critic_feature_layer(arch))
    score = dense(h, params["dis/fc/W"], params["dis/fc/b"])
    return score.reshape(x.shape[0]), features


def generator_forward(params: Mapping[str, Tensor], stats: Mapping[str, np.ndarray], z: Tensor,
                      arch: Architecture, training: bool) -> Tensor:
    """
    Images in [−1, 1] of shape (N, 3, S, S) from latents of shape (N, d_z).

    In training mode batch statistics are used and ``stats`` is updated in
    place; pass copies to leave the stored running statistics untouched.
    """
    if z.ndim != 2 or z.shape[1] != arch.zdim:
        raise ShapeError(
            f"Expected latent batch of shape (N, {arch.zdim}), got {z.shape}",
            error_code="SHAPE_MISMATCH",
            context={"input": z.shape, "zdim": arch.zdim},
        )

    def norm(h: Tensor, name: str) -> Tensor:
        return batch_norm(h, params[f"{name}/gamma"], params[f"{name}/beta"],
                          stats[f"{name}/running_mean"], stats[f"{name}/running_var"], training)

    h = dense(z, params["gen/fc/W"], params["gen/fc/b"])
    h = h.reshape(z.shape[0], arch.deepest_channels, DEEPEST_EXTENT, DEEPEST_EXTENT)
    h = leaky_relu(norm(h, "gen/bn_fc"))
    for spec in deconv_plan(arch):
        h = deconv2d(h, params[f"{spec.name}/W"], params[f"{spec.name}/b"], spec.stride, spec.pad)
        if spec.batch_norm:
            h = leaky_relu(norm(h, f"{spec.name}/bn"))
    return h.tanh()
