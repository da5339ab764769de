"""
Dense tensors, reverse-mode differentiation and the Adam optimizer.
"""

from .autograd import backward, gradcheck, gradient_error, grad, numerical_gradient
from .functional import (
    batch_norm, conv2d, deconv2d, dense, flatten, fold, leaky_relu, sq_norm, unfold,
)
from .optim import Adam, OptimState, adam_step
from .tensor import (
    Tensor, as_tensor, default_dtype, enable_grad, get_default_dtype, is_grad_enabled,
    no_grad,
)

__all__ = [
    "Tensor",
    "as_tensor",
    "default_dtype",
    "enable_grad",
    "get_default_dtype",
    "is_grad_enabled",
    "no_grad",
    "grad",
    "backward",
    "gradcheck",
    "gradient_error",
    "numerical_gradient",
    "conv2d",
    "deconv2d",
    "dense",
    "leaky_relu",
    "batch_norm",
    "flatten",
    "sq_norm",
    "unfold",
    "fold",
    "Adam",
    "OptimState",
    "adam_step",
]
