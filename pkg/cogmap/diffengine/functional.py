"""
Neural-network operations built on the differentiable tensor primitives.

Convolutions go through ``unfold`` (im2col) and ``fold`` (col2im), which are
each other's adjoints; a transposed convolution reuses the forward
convolution's weight array, so ``deconv2d`` is exactly the adjoint of
``conv2d`` with the same geometry.
"""

from typing import Optional, Tuple

import numpy as np

from ..models.exceptions import ShapeError
from .tensor import Tensor, as_tensor, matmul

LEAKY_SLOPE = 0.2
BN_EPS = 1e-5
BN_MOMENTUM = 0.9


def _output_extent(size: int, kernel: int, stride: int, pad: int) -> int:
    return (size + 2 * pad - kernel) // stride + 1


def _unfold_array(x: np.ndarray, kernel: int, stride: int, pad: int) -> np.ndarray:
    n, c, h, w = x.shape
    out_h = _output_extent(h, kernel, stride, pad)
    out_w = _output_extent(w, kernel, stride, pad)
    padded = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    cols = np.empty((n, c, kernel, kernel, out_h, out_w), dtype=x.dtype)
    for i in range(kernel):
        for j in range(kernel):
            cols[:, :, i, j] = padded[:, :, i:i + stride * out_h:stride, j:j + stride * out_w:stride]
    return cols.reshape(n, c * kernel * kernel, out_h * out_w)


def _fold_array(cols: np.ndarray, shape: Tuple[int, int, int, int], kernel: int,
                stride: int, pad: int) -> np.ndarray:
    n, c, h, w = shape
    out_h = _output_extent(h, kernel, stride, pad)
    out_w = _output_extent(w, kernel, stride, pad)
    cols = cols.reshape(n, c, kernel, kernel, out_h, out_w)
    padded = np.zeros((n, c, h + 2 * pad, w + 2 * pad), dtype=cols.dtype)
    for i in range(kernel):
        for j in range(kernel):
            padded[:, :, i:i + stride * out_h:stride, j:j + stride * out_w:stride] += cols[:, :, i, j]
    return padded[:, :, pad:pad + h, pad:pad + w]


def unfold(x: Tensor, kernel: int, stride: int, pad: int) -> Tensor:
    """Patches of ``x`` (N, C, H, W) as columns of shape (N, C·k·k, H_out·W_out)."""
    shape = x.shape

    def backward(g: Tensor) -> Tuple[Tensor]:
        return (fold(g, shape, kernel, stride, pad),)

    return Tensor._from_op(_unfold_array(x.data, kernel, stride, pad), "unfold", (x,), backward)


def fold(cols: Tensor, shape: Tuple[int, int, int, int], kernel: int, stride: int,
         pad: int) -> Tensor:
    """Sum columns back into an image of ``shape``; the adjoint of ``unfold``."""
    shape = tuple(shape)

    def backward(g: Tensor) -> Tuple[Tensor]:
        return (unfold(g, kernel, stride, pad),)

    data = np.ascontiguousarray(_fold_array(cols.data, shape, kernel, stride, pad))
    return Tensor._from_op(data, "fold", (cols,), backward)


def _check_conv(x: Tensor, kernel: Tensor, in_axis: int, op: str) -> None:
    if x.ndim != 4 or kernel.ndim != 4:
        raise ShapeError(
            f"{op} expects 4-D input and kernel, got {x.shape} and {kernel.shape}",
            error_code="SHAPE_MISMATCH",
            context={"input": x.shape, "kernel": kernel.shape},
        )
    if x.shape[1] != kernel.shape[in_axis] or kernel.shape[2] != kernel.shape[3]:
        raise ShapeError(
            f"{op} channel mismatch between input {x.shape} and kernel {kernel.shape}",
            error_code="SHAPE_MISMATCH",
            context={"input": x.shape, "kernel": kernel.shape},
        )


def conv2d(x: Tensor, kernel: Tensor, bias: Optional[Tensor] = None, stride: int = 1,
           pad: int = 0) -> Tensor:
    """
    Cross-correlation of ``x`` (N, C, H, W) with ``kernel`` (O, C, k, k).

    Raises:
        ShapeError: If channel counts disagree or the output would be empty
    """
    _check_conv(x, kernel, 1, "conv2d")
    n, c, h, w = x.shape
    out_channels, _, k, _ = kernel.shape
    out_h = _output_extent(h, k, stride, pad)
    out_w = _output_extent(w, k, stride, pad)
    if out_h <= 0 or out_w <= 0:
        raise ShapeError(
            f"conv2d output would be empty for input {x.shape} and kernel {kernel.shape}",
            error_code="SHAPE_MISMATCH",
            context={"input": x.shape, "kernel": kernel.shape, "stride": stride, "pad": pad},
        )
    cols = unfold(x, k, stride, pad)
    out = matmul(kernel.reshape(out_channels, c * k * k), cols)
    out = out.reshape(n, out_channels, out_h, out_w)
    if bias is not None:
        out = out + bias.reshape(1, out_channels, 1, 1)
    return out


def deconv2d(x: Tensor, kernel: Tensor, bias: Optional[Tensor] = None, stride: int = 1,
             pad: int = 0) -> Tensor:
    """
    Transposed convolution of ``x`` (N, C_in, H, W) with ``kernel`` (C_in, C_out, k, k).

    The output extent is ``(H − 1)·stride − 2·pad + k``.

    Raises:
        ShapeError: If channel counts disagree or the output would be empty
    """
    _check_conv(x, kernel, 0, "deconv2d")
    n, c_in, h, w = x.shape
    _, c_out, k, _ = kernel.shape
    out_h = (h - 1) * stride - 2 * pad + k
    out_w = (w - 1) * stride - 2 * pad + k
    if out_h <= 0 or out_w <= 0:
        raise ShapeError(
            f"deconv2d output would be empty for input {x.shape} and kernel {kernel.shape}",
            error_code="SHAPE_MISMATCH",
            context={"input": x.shape, "kernel": kernel.shape, "stride": stride, "pad": pad},
        )
    weight = kernel.reshape(c_in, c_out * k * k).transpose(1, 0)
    cols = matmul(weight, x.reshape(n, c_in, h * w))
    out = fold(cols, (n, c_out, out_h, out_w), k, stride, pad)
    if bias is not None:
        out = out + bias.reshape(1, c_out, 1, 1)
    return out


def dense(x: Tensor, weight: Tensor, bias: Optional[Tensor] = None) -> Tensor:
    """Affine map ``x @ weight + bias`` for ``x`` of shape (N, in)."""
    if x.ndim != 2 or weight.ndim != 2 or x.shape[1] != weight.shape[0]:
        raise ShapeError(
            f"dense shape mismatch between input {x.shape} and weight {weight.shape}",
            error_code="SHAPE_MISMATCH",
            context={"input": x.shape, "weight": weight.shape},
        )
    out = matmul(x, weight)
    return out + bias if bias is not None else out


def leaky_relu(x: Tensor, slope: float = LEAKY_SLOPE) -> Tensor:
    mask = np.where(x.data > 0, 1.0, slope).astype(x.dtype)
    return x * as_tensor(mask, x)


def flatten(x: Tensor) -> Tensor:
    return x.reshape(x.shape[0], -1)


def sq_norm(x: Tensor, axis: Optional[Tuple[int, ...]] = None) -> Tensor:
    """Sum of squares, over everything or over ``axis``."""
    return (x * x).sum(axis)


def batch_norm(x: Tensor, gamma: Tensor, beta: Tensor, running_mean: np.ndarray,
               running_var: np.ndarray, training: bool, momentum: float = BN_MOMENTUM,
               eps: float = BN_EPS) -> Tensor:
    """
    Per-channel normalization for (N, C) or (N, C, H, W) inputs.

    In training mode the batch statistics are used and the running
    statistics are updated in place as ``momentum·old + (1 − momentum)·new``
    (unbiased variance). In evaluation mode the running statistics are used.
    """
    if x.ndim not in (2, 4) or gamma.shape != (x.shape[1],):
        raise ShapeError(
            f"batch_norm shape mismatch between input {x.shape} and scale {gamma.shape}",
            error_code="SHAPE_MISMATCH",
            context={"input": x.shape, "gamma": gamma.shape},
        )
    channels = x.shape[1]
    axes = (0,) if x.ndim == 2 else (0, 2, 3)
    param_shape = (1, channels) if x.ndim == 2 else (1, channels, 1, 1)

    if training:
        mean = x.mean(axes, keepdims=True)
        centered = x - mean
        var = (centered * centered).mean(axes, keepdims=True)
        normalized = centered * (var + eps) ** -0.5

        count = x.size // channels
        unbiased = var.data.reshape(channels) * (count / max(count - 1, 1))
        running_mean *= momentum
        running_mean += (1.0 - momentum) * mean.data.reshape(channels)
        running_var *= momentum
        running_var += (1.0 - momentum) * unbiased
    else:
        mean = as_tensor(running_mean.reshape(param_shape).astype(x.dtype), x)
        inv_std = as_tensor((1.0 / np.sqrt(running_var + eps)).reshape(param_shape).astype(x.dtype), x)
        normalized = (x - mean) * inv_std

    return normalized * gamma.reshape(param_shape) + beta.reshape(param_shape)
