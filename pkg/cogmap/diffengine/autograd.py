"""
Gradient computation over recorded tensor graphs.
"""

import logging
from typing import Callable, Dict, List, Mapping, Optional, Sequence

import numpy as np

from ..models.exceptions import GradientError, NonFiniteError
from .tensor import Tensor, add, default_dtype, enable_grad, no_grad

logger = logging.getLogger(__name__)


def _topological_order(root: Tensor) -> List[Tensor]:
    """Tensors reachable from ``root`` through recorded nodes, inputs first."""
    order: List[Tensor] = []
    visited = set()
    stack = [(root, False)]
    while stack:
        tensor, expanded = stack.pop()
        if expanded:
            order.append(tensor)
            continue
        if id(tensor) in visited:
            continue
        visited.add(id(tensor))
        stack.append((tensor, True))
        if tensor._node is not None:
            for parent in tensor._node.parents:
                if parent.requires_grad and id(parent) not in visited:
                    stack.append((parent, False))
    return order


def _propagate(output: Tensor, seed: Tensor, keep: Sequence[Tensor],
               create_graph: bool) -> Dict[int, Tensor]:
    """Push ``seed`` back through the graph; returns gradients keyed by tensor id."""
    keep_ids = {id(t) for t in keep}
    grads: Dict[int, Tensor] = {id(output): seed}
    kept: Dict[int, Tensor] = {}

    recording = enable_grad() if create_graph else no_grad()
    with recording:
        for tensor in reversed(_topological_order(output)):
            g = grads.pop(id(tensor), None)
            if g is None:
                continue
            if id(tensor) in keep_ids:
                kept[id(tensor)] = g
            node = tensor._node
            if node is None:
                continue
            for parent, parent_grad in zip(node.parents, node.backward(g)):
                if parent_grad is None or not parent.requires_grad:
                    continue
                previous = grads.get(id(parent))
                grads[id(parent)] = parent_grad if previous is None else add(previous, parent_grad)
    return kept


def grad(output: Tensor, inputs: Sequence[Tensor], grad_output: Optional[Tensor] = None,
         create_graph: bool = False) -> List[Tensor]:
    """
    Gradients of ``output`` with respect to each of ``inputs``.

    Args:
        output: Tensor to differentiate; must be a single value unless
            ``grad_output`` is given
        inputs: Tensors to differentiate with respect to
        grad_output: Seed for the vector-Jacobian product
        create_graph: Record the gradient computation so that the returned
            gradients can be differentiated again

    Returns:
        One gradient per input; inputs that do not influence ``output`` get zeros.

    Raises:
        GradientError: If the request is not well formed
    """
    if grad_output is None:
        if output.size != 1:
            raise GradientError(
                f"Gradient seed required for non-scalar output of shape {output.shape}",
                error_code="NON_SCALAR",
                context={"shape": output.shape},
            )
        grad_output = Tensor(np.ones(output.shape, dtype=output.dtype), dtype=output.dtype)
    elif grad_output.shape != output.shape:
        raise GradientError(
            f"Gradient seed shape {grad_output.shape} does not match output {output.shape}",
            error_code="SHAPE_MISMATCH",
            context={"seed": grad_output.shape, "output": output.shape},
        )
    if not output.requires_grad:
        return [Tensor(np.zeros(t.shape, dtype=t.dtype), dtype=t.dtype) for t in inputs]

    kept = _propagate(output, grad_output, inputs, create_graph)
    result = []
    for tensor in inputs:
        g = kept.get(id(tensor))
        if g is None:
            g = Tensor(np.zeros(tensor.shape, dtype=tensor.dtype), dtype=tensor.dtype)
        result.append(g)
    return result


def backward(loss: Tensor,
             params: Optional[Mapping[str, Tensor]] = None) -> Dict[str, np.ndarray]:
    """
    Differentiate a scalar loss and accumulate into ``.grad`` of every reachable leaf.

    Args:
        loss: Single-valued, finite tensor
        params: Named parameters whose gradients are returned

    Returns:
        Mapping from parameter name to gradient array (zeros when unreachable).

    Raises:
        GradientError: If the loss is not a single value
        NonFiniteError: If the loss is NaN or infinite
    """
    if loss.size != 1:
        raise GradientError(
            f"Loss must be a single value, got shape {loss.shape}",
            error_code="NON_SCALAR",
            context={"shape": loss.shape},
        )
    if not np.all(np.isfinite(loss.data)):
        raise NonFiniteError("Loss is not finite", error_code="NON_FINITE",
                             context={"value": float(loss.data.reshape(-1)[0])})

    leaves = [t for t in _topological_order(loss) if t.is_leaf and t.requires_grad]
    if loss.requires_grad:
        seed = Tensor(np.ones(loss.shape, dtype=loss.dtype), dtype=loss.dtype)
        kept = _propagate(loss, seed, leaves, create_graph=False)
        for leaf in leaves:
            g = kept.get(id(leaf))
            if g is None:
                continue
            leaf.grad = g.data.copy() if leaf.grad is None else leaf.grad + g.data

    named: Dict[str, np.ndarray] = {}
    for name, param in (params or {}).items():
        named[name] = param.grad.copy() if param.grad is not None else np.zeros_like(param.data)
    return named


def numerical_gradient(fn: Callable[[Sequence[Tensor]], Tensor], arrays: Sequence[np.ndarray],
                       eps: float = 1e-3) -> List[np.ndarray]:
    """Central-difference gradient of a scalar-valued ``fn`` at ``arrays`` (64-bit)."""
    base = [np.array(a, dtype=np.float64) for a in arrays]
    result = []
    with default_dtype("float64"), no_grad():
        for k, array in enumerate(base):
            g = np.zeros_like(array)
            flat = array.reshape(-1)
            for i in range(flat.size):
                original = flat[i]
                flat[i] = original + eps
                upper = fn([Tensor(a) for a in base]).item()
                flat[i] = original - eps
                lower = fn([Tensor(a) for a in base]).item()
                flat[i] = original
                g.reshape(-1)[i] = (upper - lower) / (2.0 * eps)
            result.append(g)
    return result


def gradient_error(fn: Callable[[Sequence[Tensor]], Tensor], arrays: Sequence[np.ndarray],
                   eps: float = 1e-3) -> float:
    """
    Largest relative disagreement between analytic and central-difference gradients.

    Each input's error is ``‖g_analytic − g_numeric‖ / max(‖g_analytic‖, ‖g_numeric‖)``.
    """
    with default_dtype("float64"):
        leaves = [Tensor(a, requires_grad=True) for a in arrays]
        analytic = grad(fn(leaves), leaves)
    numeric = numerical_gradient(fn, arrays, eps)

    worst = 0.0
    for a, n in zip(analytic, numeric):
        scale = max(float(np.linalg.norm(a.data)), float(np.linalg.norm(n)))
        if scale == 0.0:
            continue
        worst = max(worst, float(np.linalg.norm(a.data - n)) / scale)
    return worst


def gradcheck(fn: Callable[[Sequence[Tensor]], Tensor], arrays: Sequence[np.ndarray],
              eps: float = 1e-3, rtol: float = 1e-6) -> bool:
    """
    Verify analytic gradients of ``fn`` against central differences in 64-bit mode.

    Raises:
        GradientError: If the relative error exceeds ``rtol``
    """
    error = gradient_error(fn, arrays, eps)
    logger.debug("Gradient check finished",
                 extra={'context': {'relative_error': error, 'rtol': rtol}})
    if error > rtol:
        raise GradientError(
            f"Analytic gradient disagrees with finite differences (relative error {error:.3e})",
            error_code="GRADCHECK_FAILED",
            context={"relative_error": error, "rtol": rtol},
        )
    return True
