"""
Adam optimizer state and update rule.
"""

from dataclasses import dataclass, field
from typing import Dict, Mapping

import numpy as np

from ..models.exceptions import NonFiniteError, ShapeError
from .tensor import Tensor


@dataclass
class OptimState:
    """Adam moments per named parameter plus the shared step counter."""

    lr: float = 2e-4
    beta1: float = 0.0
    beta2: float = 0.9
    eps: float = 1e-8
    step: int = 0
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)

    @classmethod
    def for_params(cls, params: Mapping[str, Tensor], lr: float = 2e-4, beta1: float = 0.0,
                   beta2: float = 0.9, eps: float = 1e-8) -> "OptimState":
        """Zero-initialized state matching ``params``."""
        return cls(
            lr=lr, beta1=beta1, beta2=beta2, eps=eps,
            m={name: np.zeros_like(p.data) for name, p in params.items()},
            v={name: np.zeros_like(p.data) for name, p in params.items()},
        )


def adam_step(params: Mapping[str, Tensor], grads: Mapping[str, np.ndarray],
              state: OptimState) -> Mapping[str, Tensor]:
    """
    Apply one bias-corrected Adam update in place.

    Args:
        params: Named parameter tensors (updated in place)
        grads: Gradient array per parameter name; missing names count as zero
        state: Optimizer state (moments and step counter advance)

    Returns:
        The updated parameters.

    Raises:
        ShapeError: If a gradient or moment shape differs from its parameter
        NonFiniteError: If a gradient contains NaN or Inf
    """
    for name, param in params.items():
        g = grads.get(name)
        if g is None:
            continue
        if np.shape(g) != param.shape or state.m.get(name, param.data).shape != param.shape:
            raise ShapeError(
                f"Gradient for '{name}' has shape {np.shape(g)}, parameter has {param.shape}",
                error_code="SHAPE_MISMATCH",
                context={"parameter": name, "gradient": np.shape(g), "expected": param.shape},
            )
        if not np.all(np.isfinite(g)):
            raise NonFiniteError(
                f"Non-finite gradient for parameter '{name}'",
                error_code="NON_FINITE",
                context={"parameter": name},
            )

    state.step += 1
    t = state.step
    m_correction = 1.0 - state.beta1 ** t
    v_correction = 1.0 - state.beta2 ** t

    for name, param in params.items():
        g = grads.get(name)
        if g is None:
            g = np.zeros_like(param.data)
        g = np.asarray(g, dtype=param.dtype)
        m = state.m.setdefault(name, np.zeros_like(param.data))
        v = state.v.setdefault(name, np.zeros_like(param.data))
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g * g
        update = state.lr * (m / m_correction) / (np.sqrt(v / v_correction) + state.eps)
        param.data -= update.astype(param.dtype)
    return params


class Adam:
    """Convenience wrapper binding a parameter set to its optimizer state."""

    def __init__(self, params: Mapping[str, Tensor], state: OptimState):
        self.params = params
        self.state = state

    def step(self, grads: Mapping[str, np.ndarray]) -> None:
        adam_step(self.params, grads, self.state)
