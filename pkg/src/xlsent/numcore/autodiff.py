"""Tape-free reverse-mode autodiff over numpy arrays.

Every op returns a new :class:`Tensor` holding its parents and a closure that
maps the output gradient to parent gradients. :func:`backward` walks the graph
in reverse topological order. Tensors are treated as immutable values.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np


class GraphError(RuntimeError):
    pass


class NonFiniteError(FloatingPointError):
    pass


class ShapeError(ValueError):
    pass


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward", "op", "name")

    def __init__(self, data, requires_grad: bool = False, dtype=None, name: str | None = None):
        arr = np.asarray(data, dtype=dtype)
        if arr.dtype.kind != "f":
            arr = arr.astype(np.float64 if dtype is None else dtype)
        self.data = arr
        self.grad = None
        self.requires_grad = requires_grad
        self._parents: tuple = ()
        self._backward: Callable | None = None
        self.op = "leaf"
        self.name = name

    @property
    def shape(self) -> tuple:
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    def numpy(self) -> np.ndarray:
        return self.data

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self) -> str:
        tag = f" {self.name}" if self.name else ""
        return f"Tensor{tag}(shape={self.shape}, op={self.op}, requires_grad={self.requires_grad})"

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    @property
    def T(self):
        return transpose(self)


def _as_tensor(x, like: Tensor | None = None) -> Tensor:
    if isinstance(x, Tensor):
        return x
    dtype = like.dtype if like is not None else None
    return Tensor(np.asarray(x, dtype=dtype))


def _make(op: str, data: np.ndarray, parents: Sequence[Tensor], backward: Callable) -> Tensor:
    if not np.all(np.isfinite(data)):
        raise NonFiniteError(f"{op} produced a non-finite value")
    out = Tensor.__new__(Tensor)
    out.data = data
    out.grad = None
    out.name = None
    out.op = op
    out.requires_grad = any(p.requires_grad for p in parents)
    if out.requires_grad:
        out._parents = tuple(parents)
        out._backward = backward
    else:
        out._parents = ()
        out._backward = None
    return out


def _unbroadcast(g: np.ndarray, shape: tuple) -> np.ndarray:
    if g.shape == shape:
        return g
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, n in enumerate(shape):
        if n == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


def _check_broadcast(op, a: Tensor, b: Tensor) -> None:
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeError(f"{op}: incompatible shapes {a.shape} and {b.shape}") from None


def add(a, b) -> Tensor:
    a = _as_tensor(a, b if isinstance(b, Tensor) else None)
    b = _as_tensor(b, a)
    _check_broadcast("add", a, b)
    sa, sb = a.shape, b.shape
    return _make("add", a.data + b.data, (a, b),
                 lambda g: (_unbroadcast(g, sa), _unbroadcast(g, sb)))


def sub(a, b) -> Tensor:
    a = _as_tensor(a, b if isinstance(b, Tensor) else None)
    b = _as_tensor(b, a)
    _check_broadcast("sub", a, b)
    sa, sb = a.shape, b.shape
    return _make("sub", a.data - b.data, (a, b),
                 lambda g: (_unbroadcast(g, sa), _unbroadcast(-g, sb)))


def mul(a, b) -> Tensor:
    a = _as_tensor(a, b if isinstance(b, Tensor) else None)
    b = _as_tensor(b, a)
    _check_broadcast("mul", a, b)
    ad, bd = a.data, b.data
    return _make("mul", ad * bd, (a, b),
                 lambda g: (_unbroadcast(g * bd, ad.shape), _unbroadcast(g * ad, bd.shape)))


def matmul(a: Tensor, b: Tensor) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    if a.data.ndim != 2 or b.data.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: incompatible shapes {a.shape} and {b.shape}")
    ad, bd = a.data, b.data
    return _make("matmul", ad @ bd, (a, b), lambda g: (g @ bd.T, ad.T @ g))


def transpose(a: Tensor) -> Tensor:
    if a.data.ndim != 2:
        raise ShapeError(f"transpose expects a matrix, got shape {a.shape}")
    return _make("transpose", a.data.T, (a,), lambda g: (g.T,))


def reshape(a: Tensor, shape: tuple) -> Tensor:
    old = a.shape
    try:
        data = a.data.reshape(shape)
    except ValueError:
        raise ShapeError(f"reshape: cannot view {old} as {shape}") from None
    return _make("reshape", data, (a,), lambda g: (g.reshape(old),))


def tanh(a: Tensor) -> Tensor:
    y = np.tanh(a.data)
    return _make("tanh", y, (a,), lambda g: (g * (1.0 - y * y),))


def sigmoid(a: Tensor) -> Tensor:
    # tanh form avoids overflow in exp for large |x|
    y = 0.5 * (1.0 + np.tanh(0.5 * a.data))
    return _make("sigmoid", y, (a,), lambda g: (g * y * (1.0 - y),))


def where(cond: np.ndarray, a, b) -> Tensor:
    """Elementwise select: ``a`` where ``cond`` holds, else ``b`` (``cond`` is constant)."""
    a = _as_tensor(a, b if isinstance(b, Tensor) else None)
    b = _as_tensor(b, a)
    cond = np.asarray(cond, dtype=bool)
    out = np.where(cond, a.data, b.data)
    sa, sb = a.shape, b.shape
    return _make("where", out, (a, b),
                 lambda g: (_unbroadcast(np.where(cond, g, 0.0).astype(g.dtype), sa),
                            _unbroadcast(np.where(cond, 0.0, g).astype(g.dtype), sb)))


def concat(tensors: Sequence[Tensor], axis: int = -1) -> Tensor:
    if not tensors:
        raise ShapeError("concat of zero tensors")
    try:
        data = np.concatenate([t.data for t in tensors], axis=axis)
    except ValueError:
        raise ShapeError(f"concat: incompatible shapes {[t.shape for t in tensors]} on axis {axis}") from None
    bounds = np.cumsum([t.shape[axis] for t in tensors])[:-1]

    def backward(g):
        return tuple(np.split(g, bounds, axis=axis))

    return _make("concat", data, tuple(tensors), backward)


def stack(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    if not tensors:
        raise ShapeError("stack of zero tensors")
    shapes = {t.shape for t in tensors}
    if len(shapes) != 1:
        raise ShapeError(f"stack: shapes differ {sorted(shapes)}")
    data = np.stack([t.data for t in tensors], axis=axis)
    n = len(tensors)

    def backward(g):
        return tuple(np.take(g, i, axis=axis) for i in range(n))

    return _make("stack", data, tuple(tensors), backward)


class _SliceGrad:
    """Gradient for a single leading-axis slice of the parent."""

    __slots__ = ("index", "value")

    def __init__(self, index, value):
        self.index = index
        self.value = value


def unstack(a: Tensor) -> list[Tensor]:
    """Split along axis 0; each piece back-propagates into its own slot."""
    outs = []
    for i in range(a.shape[0]):
        outs.append(_make("unstack", a.data[i], (a,), lambda g, i=i: (_SliceGrad(i, g),)))
    return outs


def dropout(x: Tensor, p: float, train: bool, rng: np.random.Generator | None = None,
            mask: np.ndarray | None = None) -> Tensor:
    """Inverted dropout. ``mask`` (boolean keep-mask) overrides sampling."""
    if not 0.0 <= p < 1.0:
        raise ValueError(f"dropout probability must be in [0, 1), got {p}")
    if not train or p == 0.0:
        return x
    if mask is None:
        if rng is None:
            raise ValueError("dropout in train mode needs an rng or an explicit mask")
        mask = rng.random(x.shape) >= p
    elif mask.shape != x.shape:
        raise ShapeError(f"dropout: mask shape {mask.shape} does not match input {x.shape}")
    scale = (mask / (1.0 - p)).astype(x.dtype)
    return _make("dropout", x.data * scale, (x,), lambda g: (g * scale,))


def embedding_lookup(matrix: Tensor, indices: np.ndarray) -> Tensor:
    matrix = _as_tensor(matrix)
    indices = np.asarray(indices)
    if indices.dtype.kind not in "iu":
        raise ShapeError("embedding_lookup: indices must be integers")
    if indices.size and (indices.min() < 0 or indices.max() >= matrix.shape[0]):
        raise ShapeError(f"embedding_lookup: index out of range for table of shape {matrix.shape}")
    shape = matrix.shape

    def backward(g):
        full = np.zeros(shape, dtype=g.dtype)
        np.add.at(full, indices.reshape(-1), g.reshape(-1, shape[1]))
        return (full,)

    return _make("embedding_lookup", matrix.data[indices], (matrix,), backward)


def masked_select(x: Tensor, mask: np.ndarray) -> Tensor:
    """Rows of ``x`` along axis 0 where ``mask`` is true."""
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != x.shape[:1]:
        raise ShapeError(f"masked_select: mask shape {mask.shape} does not match leading axis of {x.shape}")
    shape = x.shape

    def backward(g):
        full = np.zeros(shape, dtype=g.dtype)
        full[mask] = g
        return (full,)

    return _make("masked_select", x.data[mask], (x,), backward)


def sum_all(x: Tensor) -> Tensor:
    shape = x.shape
    return _make("sum", np.asarray(x.data.sum()), (x,),
                 lambda g: (np.broadcast_to(g, shape).astype(g.dtype),))


def mean_all(x: Tensor) -> Tensor:
    shape, n = x.shape, x.data.size
    return _make("mean", np.asarray(x.data.mean()), (x,),
                 lambda g: (np.full(shape, g / n, dtype=x.dtype),))


def log_softmax_np(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def softmax_np(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def softmax_cross_entropy(logits: Tensor, labels, reduction: str = "mean") -> Tensor:
    """Cross entropy of integer ``labels`` under ``softmax(logits)``."""
    labels = np.asarray(labels)
    if logits.data.ndim != 2 or labels.shape != (logits.shape[0],):
        raise ShapeError(f"softmax_cross_entropy: logits {logits.shape} vs labels {labels.shape}")
    if labels.size and (labels.min() < 0 or labels.max() >= logits.shape[1]):
        raise ShapeError("softmax_cross_entropy: label out of range")
    n = logits.shape[0]
    logp = log_softmax_np(logits.data)
    rows = np.arange(n)
    losses = -logp[rows, labels]
    if reduction == "mean":
        value, scale = losses.mean(), 1.0 / n
    elif reduction == "sum":
        value, scale = losses.sum(), 1.0
    else:
        raise ValueError(f"unknown reduction {reduction!r}")
    probs = np.exp(logp)

    def backward(g):
        d = probs.copy()
        d[rows, labels] -= 1.0
        return ((g * scale) * d,)

    return _make("softmax_cross_entropy", np.asarray(value, dtype=logits.dtype), (logits,), backward)


def _topological(loss: Tensor) -> list[Tensor]:
    order: list[Tensor] = []
    visited: set[int] = set()
    stack = [(loss, False)]
    while stack:
        node, done = stack.pop()
        if done:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if id(p) not in visited:
                stack.append((p, False))
    return order


def backward(loss: Tensor, params: Sequence[Tensor] | None = None) -> list[np.ndarray] | None:
    """Propagate d(loss)/d(node) through the recorded graph.

    Gradients are accumulated into ``.grad`` of every leaf with
    ``requires_grad``. When ``params`` is given, their gradients for this call
    are also returned, zeros for parameters the loss does not depend on.
    """
    if loss.data.size != 1:
        raise GraphError(f"backward needs a scalar loss, got shape {loss.shape}")
    if loss._backward is None:
        raise GraphError("backward called on a tensor with no recorded forward graph")
    grads: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
    owned: set[int] = set()
    leaves: dict[int, Tensor] = {}
    for node in reversed(_topological(loss)):
        g = grads.pop(id(node), None)
        if g is None:
            continue
        if node._backward is None:
            if node.requires_grad:
                leaves[id(node)] = node
                grads[id(node)] = g
            continue
        for parent, pg in zip(node._parents, node._backward(g)):
            if pg is None or not parent.requires_grad:
                continue
            pid = id(parent)
            if isinstance(pg, _SliceGrad):
                buf = grads.get(pid)
                if buf is None:
                    buf = np.zeros(parent.shape, dtype=pg.value.dtype)
                elif pid not in owned:
                    buf = buf.copy()
                grads[pid] = buf
                owned.add(pid)
                buf[pg.index] += pg.value
            elif pid in grads:
                grads[pid] = grads[pid] + pg
                owned.add(pid)
            else:
                grads[pid] = pg
                owned.discard(pid)
    for lid, leaf in leaves.items():
        g = np.asarray(grads[lid], dtype=leaf.dtype)
        leaf.grad = g.copy() if leaf.grad is None else leaf.grad + g
        grads[lid] = g
    if params is None:
        return None
    return [np.asarray(grads.get(id(p), np.zeros_like(p.data)), dtype=p.dtype) for p in params]
