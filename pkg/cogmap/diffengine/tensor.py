"""
Dense tensors carrying a reverse-mode differentiation record.

Every backward rule in this module is written with ``Tensor`` operations,
so gradients computed with ``create_graph=True`` can be differentiated
again (the critic's gradient penalty depends on this).
"""

import contextlib
import threading
from dataclasses import dataclass
from typing import Any, Callable, Iterator, Optional, Sequence, Tuple, Union

import numpy as np

from ..models.exceptions import NonFiniteError, ShapeError

ArrayLike = Union["Tensor", np.ndarray, float, int, Sequence[float]]
BackwardFn = Callable[["Tensor"], Sequence[Optional["Tensor"]]]

_DTYPES = {"float32": np.float32, "float64": np.float64}


class _EngineState(threading.local):
    """Per-thread switches: graph recording and the default float type."""

    def __init__(self) -> None:
        self.grad_enabled = True
        self.dtype: type = np.float32


_state = _EngineState()


def is_grad_enabled() -> bool:
    """Whether new operations are recorded for differentiation."""
    return _state.grad_enabled


def get_default_dtype() -> type:
    """The float type used for newly created leaf tensors."""
    return _state.dtype


@contextlib.contextmanager
def no_grad() -> Iterator[None]:
    """Disable graph recording inside the block."""
    previous = _state.grad_enabled
    _state.grad_enabled = False
    try:
        yield
    finally:
        _state.grad_enabled = previous


@contextlib.contextmanager
def enable_grad() -> Iterator[None]:
    """Re-enable graph recording inside the block."""
    previous = _state.grad_enabled
    _state.grad_enabled = True
    try:
        yield
    finally:
        _state.grad_enabled = previous


@contextlib.contextmanager
def default_dtype(name: str) -> Iterator[None]:
    """
    Create leaf tensors with the given precision inside the block.

    Args:
        name: ``"float32"`` (training) or ``"float64"`` (gradient verification)
    """
    if name not in _DTYPES:
        raise ValueError(f"Unsupported dtype '{name}'. Supported: {', '.join(_DTYPES)}")
    previous = _state.dtype
    _state.dtype = _DTYPES[name]
    try:
        yield
    finally:
        _state.dtype = previous


@dataclass
class Node:
    """One recorded operation: its inputs and its vector-Jacobian product."""

    op: str
    parents: Tuple["Tensor", ...]
    backward: BackwardFn


class Tensor:
    """N-dimensional float array with an optional link into a computation graph."""

    __array_priority__ = 100.0

    def __init__(self, data: Any, requires_grad: bool = False,
                 dtype: Optional[type] = None, name: Optional[str] = None):
        self.data: np.ndarray = np.array(data, dtype=dtype or _state.dtype)
        if not np.all(np.isfinite(self.data)):
            raise NonFiniteError(
                "Tensor created from non-finite values",
                error_code="NON_FINITE",
                context={"name": name, "shape": self.data.shape},
            )
        self.requires_grad = requires_grad
        self.grad: Optional[np.ndarray] = None
        self.name = name
        self._node: Optional[Node] = None

    @classmethod
    def _from_op(cls, data: np.ndarray, op: str, parents: Sequence["Tensor"],
                 backward: BackwardFn) -> "Tensor":
        if not np.all(np.isfinite(data)):
            raise NonFiniteError(
                f"Operation '{op}' produced non-finite values",
                error_code="NON_FINITE",
                context={"op": op, "shape": tuple(np.shape(data))},
            )
        out = cls.__new__(cls)
        out.data = data
        out.grad = None
        out.name = None
        out.requires_grad = _state.grad_enabled and any(p.requires_grad for p in parents)
        out._node = Node(op, tuple(parents), backward) if out.requires_grad else None
        return out

    # ------------------------------------------------------------------ views
    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(self.data.shape)

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return int(self.data.size)

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    @property
    def is_leaf(self) -> bool:
        return self._node is None

    def numpy(self) -> np.ndarray:
        """Copy of the underlying values."""
        return self.data.copy()

    def item(self) -> float:
        return float(self.data.reshape(-1)[0]) if self.data.size == 1 else float("nan")

    def detach(self) -> "Tensor":
        """Same values, no graph link."""
        return Tensor(self.data, dtype=self.data.dtype)

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self) -> str:
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}, dtype={self.data.dtype}{flag})"

    # ------------------------------------------------------------- operators
    def __add__(self, other: ArrayLike) -> "Tensor":
        return add(self, other)

    def __radd__(self, other: ArrayLike) -> "Tensor":
        return add(other, self)

    def __sub__(self, other: ArrayLike) -> "Tensor":
        return sub(self, other)

    def __rsub__(self, other: ArrayLike) -> "Tensor":
        return sub(other, self)

    def __mul__(self, other: ArrayLike) -> "Tensor":
        return mul(self, other)

    def __rmul__(self, other: ArrayLike) -> "Tensor":
        return mul(other, self)

    def __truediv__(self, other: ArrayLike) -> "Tensor":
        return div(self, other)

    def __rtruediv__(self, other: ArrayLike) -> "Tensor":
        return div(other, self)

    def __neg__(self) -> "Tensor":
        return neg(self)

    def __pow__(self, exponent: float) -> "Tensor":
        return power(self, exponent)

    def __matmul__(self, other: "Tensor") -> "Tensor":
        return matmul(self, other)

    def __getitem__(self, index: Any) -> "Tensor":
        return getitem(self, index)

    # --------------------------------------------------------------- methods
    def sum(self, axis: Optional[Union[int, Tuple[int, ...]]] = None,
            keepdims: bool = False) -> "Tensor":
        return tensor_sum(self, axis, keepdims)

    def mean(self, axis: Optional[Union[int, Tuple[int, ...]]] = None,
             keepdims: bool = False) -> "Tensor":
        count = self.size if axis is None else int(
            np.prod([self.shape[a] for a in _normalize_axes(axis, self.ndim)]))
        return tensor_sum(self, axis, keepdims) / float(count)

    def reshape(self, *shape: Any) -> "Tensor":
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return reshape(self, tuple(shape))

    def transpose(self, *axes: int) -> "Tensor":
        if len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        return transpose(self, tuple(axes) if axes else None)

    def swap_last(self) -> "Tensor":
        order = list(range(self.ndim))
        order[-1], order[-2] = order[-2], order[-1]
        return transpose(self, tuple(order))

    def exp(self) -> "Tensor":
        return exp(self)

    def log(self) -> "Tensor":
        return log(self)

    def sqrt(self) -> "Tensor":
        return sqrt(self)

    def tanh(self) -> "Tensor":
        return tanh(self)

    def broadcast_to(self, shape: Tuple[int, ...]) -> "Tensor":
        return broadcast_to(self, shape)

    def sum_to(self, shape: Tuple[int, ...]) -> "Tensor":
        return sum_to(self, shape)


def as_tensor(value: ArrayLike, like: Optional[Tensor] = None) -> Tensor:
    """Wrap constants as graph-free tensors matching ``like``'s precision."""
    if isinstance(value, Tensor):
        return value
    dtype = like.data.dtype if like is not None else _state.dtype
    return Tensor(np.asarray(value), dtype=dtype)


def _normalize_axes(axis: Union[int, Tuple[int, ...]], ndim: int) -> Tuple[int, ...]:
    axes = (axis,) if isinstance(axis, int) else tuple(axis)
    return tuple(a % ndim for a in axes)


def _binary_operands(a: ArrayLike, b: ArrayLike) -> Tuple[Tensor, Tensor]:
    like = a if isinstance(a, Tensor) else b if isinstance(b, Tensor) else None
    ta, tb = as_tensor(a, like), as_tensor(b, like)
    try:
        np.broadcast_shapes(ta.shape, tb.shape)
    except ValueError:
        raise ShapeError(
            f"Shapes {ta.shape} and {tb.shape} cannot be broadcast together",
            error_code="SHAPE_MISMATCH",
            context={"left": ta.shape, "right": tb.shape},
        )
    return ta, tb


# ---------------------------------------------------------------- broadcasting
def sum_to(x: Tensor, shape: Tuple[int, ...]) -> Tensor:
    """Sum ``x`` down to ``shape`` (the adjoint of broadcasting)."""
    shape = tuple(shape)
    if x.shape == shape:
        return x
    lead = x.ndim - len(shape)
    axes = tuple(range(lead)) + tuple(
        i + lead for i, extent in enumerate(shape) if extent == 1 and x.shape[i + lead] != 1)
    data = x.data.sum(axis=axes, keepdims=True).reshape(shape)

    def backward(g: Tensor) -> Tuple[Tensor]:
        return (broadcast_to(g, x.shape),)

    return Tensor._from_op(data, "sum_to", (x,), backward)


def broadcast_to(x: Tensor, shape: Tuple[int, ...]) -> Tensor:
    """Broadcast ``x`` to ``shape``."""
    shape = tuple(shape)
    if x.shape == shape:
        return x
    data = np.array(np.broadcast_to(x.data, shape))

    def backward(g: Tensor) -> Tuple[Tensor]:
        return (sum_to(g, x.shape),)

    return Tensor._from_op(data, "broadcast_to", (x,), backward)


# ------------------------------------------------------------------ arithmetic
def add(a: ArrayLike, b: ArrayLike) -> Tensor:
    ta, tb = _binary_operands(a, b)

    def backward(g: Tensor) -> Tuple[Optional[Tensor], Optional[Tensor]]:
        return (sum_to(g, ta.shape) if ta.requires_grad else None,
                sum_to(g, tb.shape) if tb.requires_grad else None)

    return Tensor._from_op(ta.data + tb.data, "add", (ta, tb), backward)


def sub(a: ArrayLike, b: ArrayLike) -> Tensor:
    ta, tb = _binary_operands(a, b)

    def backward(g: Tensor) -> Tuple[Optional[Tensor], Optional[Tensor]]:
        return (sum_to(g, ta.shape) if ta.requires_grad else None,
                neg(sum_to(g, tb.shape)) if tb.requires_grad else None)

    return Tensor._from_op(ta.data - tb.data, "sub", (ta, tb), backward)


def mul(a: ArrayLike, b: ArrayLike) -> Tensor:
    ta, tb = _binary_operands(a, b)

    def backward(g: Tensor) -> Tuple[Optional[Tensor], Optional[Tensor]]:
        return (sum_to(mul(g, tb), ta.shape) if ta.requires_grad else None,
                sum_to(mul(g, ta), tb.shape) if tb.requires_grad else None)

    return Tensor._from_op(ta.data * tb.data, "mul", (ta, tb), backward)


def div(a: ArrayLike, b: ArrayLike) -> Tensor:
    ta, tb = _binary_operands(a, b)
    if np.any(tb.data == 0):
        raise NonFiniteError("Division by zero", error_code="NON_FINITE",
                             context={"op": "div", "shape": tb.shape})
    out: Optional[Tensor] = None

    def backward(g: Tensor) -> Tuple[Optional[Tensor], Optional[Tensor]]:
        ga = sum_to(div(g, tb), ta.shape) if ta.requires_grad else None
        gb = sum_to(neg(div(mul(g, out), tb)), tb.shape) if tb.requires_grad else None
        return ga, gb

    out = Tensor._from_op(ta.data / tb.data, "div", (ta, tb), backward)
    return out


def neg(x: Tensor) -> Tensor:
    def backward(g: Tensor) -> Tuple[Tensor]:
        return (neg(g),)

    return Tensor._from_op(-x.data, "neg", (x,), backward)


def power(x: Tensor, exponent: float) -> Tensor:
    """Elementwise ``x ** exponent`` for a constant exponent."""
    exponent = float(exponent)

    def backward(g: Tensor) -> Tuple[Tensor]:
        if exponent == 1.0:
            return (g,)
        return (mul(g, mul(power(x, exponent - 1.0), exponent)),)

    data = np.power(x.data, x.data.dtype.type(exponent))
    return Tensor._from_op(data, "pow", (x,), backward)


def exp(x: Tensor) -> Tensor:
    out: Optional[Tensor] = None

    def backward(g: Tensor) -> Tuple[Tensor]:
        return (mul(g, out),)

    out = Tensor._from_op(np.exp(x.data), "exp", (x,), backward)
    return out


def log(x: Tensor) -> Tensor:
    def backward(g: Tensor) -> Tuple[Tensor]:
        return (div(g, x),)

    if np.any(x.data <= 0):
        raise NonFiniteError("Logarithm of a non-positive value", error_code="NON_FINITE",
                             context={"op": "log", "shape": x.shape})
    return Tensor._from_op(np.log(x.data), "log", (x,), backward)


def sqrt(x: Tensor) -> Tensor:
    """Square root whose derivative at 0 is taken as 0."""
    out: Optional[Tensor] = None

    def backward(g: Tensor) -> Tuple[Tensor]:
        at_zero = (out.data == 0).astype(out.data.dtype)
        denom = add(mul(out, 2.0), as_tensor(at_zero, out))
        return (mul(div(g, denom), as_tensor(1.0 - at_zero, out)),)

    out = Tensor._from_op(np.sqrt(x.data), "sqrt", (x,), backward)
    return out


def tanh(x: Tensor) -> Tensor:
    out: Optional[Tensor] = None

    def backward(g: Tensor) -> Tuple[Tensor]:
        return (mul(g, sub(1.0, mul(out, out))),)

    out = Tensor._from_op(np.tanh(x.data), "tanh", (x,), backward)
    return out


# --------------------------------------------------------------- linear algebra
def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product over the last two axes, batch axes broadcast."""
    ta, tb = as_tensor(a), as_tensor(b, a if isinstance(a, Tensor) else None)
    if ta.ndim < 2 or tb.ndim < 2 or ta.shape[-1] != tb.shape[-2]:
        raise ShapeError(
            f"Cannot multiply shapes {ta.shape} and {tb.shape}",
            error_code="SHAPE_MISMATCH",
            context={"left": ta.shape, "right": tb.shape},
        )

    def backward(g: Tensor) -> Tuple[Optional[Tensor], Optional[Tensor]]:
        ga = sum_to(matmul(g, tb.swap_last()), ta.shape) if ta.requires_grad else None
        gb = sum_to(matmul(ta.swap_last(), g), tb.shape) if tb.requires_grad else None
        return ga, gb

    return Tensor._from_op(np.matmul(ta.data, tb.data), "matmul", (ta, tb), backward)


def transpose(x: Tensor, axes: Optional[Tuple[int, ...]] = None) -> Tensor:
    order = tuple(reversed(range(x.ndim))) if axes is None else tuple(axes)
    inverse = tuple(int(i) for i in np.argsort(order))

    def backward(g: Tensor) -> Tuple[Tensor]:
        return (transpose(g, inverse),)

    return Tensor._from_op(np.ascontiguousarray(x.data.transpose(order)), "transpose",
                           (x,), backward)


def reshape(x: Tensor, shape: Tuple[int, ...]) -> Tensor:
    try:
        data = x.data.reshape(shape)
    except ValueError:
        raise ShapeError(
            f"Cannot reshape {x.shape} into {shape}",
            error_code="SHAPE_MISMATCH",
            context={"from": x.shape, "to": shape},
        )

    def backward(g: Tensor) -> Tuple[Tensor]:
        return (reshape(g, x.shape),)

    return Tensor._from_op(data.copy(), "reshape", (x,), backward)


def tensor_sum(x: Tensor, axis: Optional[Union[int, Tuple[int, ...]]] = None,
               keepdims: bool = False) -> Tensor:
    axes = None if axis is None else _normalize_axes(axis, x.ndim)
    data = np.asarray(x.data.sum(axis=axes, keepdims=keepdims), dtype=x.data.dtype)
    kept_shape = tuple(1 if (axes is None or i in axes) else extent
                       for i, extent in enumerate(x.shape))

    def backward(g: Tensor) -> Tuple[Tensor]:
        return (broadcast_to(reshape(g, kept_shape), x.shape),)

    return Tensor._from_op(data, "sum", (x,), backward)


def getitem(x: Tensor, index: Any) -> Tensor:
    def backward(g: Tensor) -> Tuple[Tensor]:
        return (scatter(g, x.shape, index),)

    return Tensor._from_op(np.array(x.data[index]), "getitem", (x,), backward)


def scatter(values: Tensor, shape: Tuple[int, ...], index: Any) -> Tensor:
    """Zeros of ``shape`` with ``values`` added at ``index`` (adjoint of indexing)."""
    data = np.zeros(shape, dtype=values.data.dtype)
    np.add.at(data, index, values.data)

    def backward(g: Tensor) -> Tuple[Tensor]:
        return (getitem(g, index),)

    return Tensor._from_op(data, "scatter", (values,), backward)
