"""Dense float64 tensors with reverse-mode automatic differentiation.

Graphs are built define-by-run, one per example, and freed when the loss
tensor goes out of scope.  Every op validates operand shapes up front and
reports both shapes on mismatch.
"""

from __future__ import annotations

import numpy as np


class ShapeError(ValueError):
    pass


def _as_array(data) -> np.ndarray:
    return np.asarray(data, dtype=np.float64)


class Tensor:
    """A dense array plus an optional backpointer into the computation graph.

    ``data`` is always float64.  ``grad`` is lazily allocated by
    :func:`backward` and has the same shape as ``data``.  Tensors created
    from raw data are leaves; ops produce interior nodes that remember their
    parents and a closure that scatters the output gradient back to them.
    """

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward_fn")

    def __init__(self, data, requires_grad: bool = False):
        self.data = _as_array(data)
        self.grad = None
        self.requires_grad = requires_grad
        self._parents = ()
        self._backward_fn = None

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    def item(self) -> float:
        return float(self.data)

    def zero_grad(self):
        self.grad = None

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"

    # -- operator sugar -------------------------------------------------

    def __add__(self, other):
        return add(self, _ensure(other))

    def __radd__(self, other):
        return add(_ensure(other), self)

    def __sub__(self, other):
        return sub(self, _ensure(other))

    def __rsub__(self, other):
        return sub(_ensure(other), self)

    def __mul__(self, other):
        return mul(self, _ensure(other))

    def __rmul__(self, other):
        return mul(_ensure(other), self)

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, _ensure(other))

    def __getitem__(self, key):
        return take(self, key)

    @property
    def T(self):
        return transpose(self)

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return reshape(self, shape)

    def sum(self, axis=None):
        return tsum(self, axis)


def _ensure(value) -> Tensor:
    if isinstance(value, Tensor):
        return value
    return Tensor(value)


def _node(data: np.ndarray, parents, backward_fn) -> Tensor:
    """Wrap an op result; constant subgraphs are pruned to plain leaves."""
    out = Tensor(data)
    if any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._backward_fn = backward_fn
    return out


def _accumulate(t: Tensor, g: np.ndarray):
    if not t.requires_grad:
        return
    # Rebinding (never in-place) keeps first-assignment aliasing safe.
    t.grad = g if t.grad is None else t.grad + g


def _unbroadcast(g: np.ndarray, shape) -> np.ndarray:
    """Sum ``g`` down to ``shape`` (inverse of numpy broadcasting)."""
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g.reshape(shape)


def _broadcast_check(a: Tensor, b: Tensor, op: str):
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeError(f"{op}: shapes {a.shape} and {b.shape} do not broadcast")


# -- arithmetic ---------------------------------------------------------


def add(a: Tensor, b: Tensor) -> Tensor:
    _broadcast_check(a, b, "add")
    out_data = a.data + b.data

    def backward_fn(g):
        _accumulate(a, _unbroadcast(g, a.shape))
        _accumulate(b, _unbroadcast(g, b.shape))

    return _node(out_data, (a, b), backward_fn)


def sub(a: Tensor, b: Tensor) -> Tensor:
    _broadcast_check(a, b, "sub")
    out_data = a.data - b.data

    def backward_fn(g):
        _accumulate(a, _unbroadcast(g, a.shape))
        _accumulate(b, _unbroadcast(-g, b.shape))

    return _node(out_data, (a, b), backward_fn)


def neg(a: Tensor) -> Tensor:
    def backward_fn(g):
        _accumulate(a, -g)

    return _node(-a.data, (a,), backward_fn)


def mul(a: Tensor, b: Tensor) -> Tensor:
    _broadcast_check(a, b, "mul")
    out_data = a.data * b.data

    def backward_fn(g):
        _accumulate(a, _unbroadcast(g * b.data, a.shape))
        _accumulate(b, _unbroadcast(g * a.data, b.shape))

    return _node(out_data, (a, b), backward_fn)


def power(a: Tensor, exponent: float) -> Tensor:
    """Elementwise a**exponent; exponent is a plain number."""
    out_data = a.data ** exponent

    def backward_fn(g):
        _accumulate(a, g * exponent * a.data ** (exponent - 1.0))

    return _node(out_data, (a,), backward_fn)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """1-D/2-D matrix product following numpy @ semantics."""
    if a.ndim not in (1, 2) or b.ndim not in (1, 2):
        raise ShapeError(f"matmul: only 1-D/2-D operands, got {a.shape} @ {b.shape}")
    if a.shape[-1] != b.shape[0]:
        raise ShapeError(f"matmul: inner dims differ, {a.shape} @ {b.shape}")
    out_data = a.data @ b.data

    def backward_fn(g):
        if a.ndim == 1 and b.ndim == 1:
            _accumulate(a, g * b.data)
            _accumulate(b, g * a.data)
        elif a.ndim == 2 and b.ndim == 2:
            _accumulate(a, g @ b.data.T)
            _accumulate(b, a.data.T @ g)
        elif a.ndim == 1:  # (n,) @ (n,k) -> (k,)
            _accumulate(a, g @ b.data.T)
            _accumulate(b, np.outer(a.data, g))
        else:  # (m,n) @ (n,) -> (m,)
            _accumulate(a, np.outer(g, b.data))
            _accumulate(b, a.data.T @ g)

    return _node(out_data, (a, b), backward_fn)


# -- elementwise nonlinearities -----------------------------------------


def tanh(a: Tensor) -> Tensor:
    out_data = np.tanh(a.data)

    def backward_fn(g):
        _accumulate(a, g * (1.0 - out_data * out_data))

    return _node(out_data, (a,), backward_fn)


def sigmoid(a: Tensor) -> Tensor:
    # Two-branch form avoids overflow for large |x|.
    x = a.data
    out_data = np.where(x >= 0, 1.0 / (1.0 + np.exp(-np.abs(x))),
                        np.exp(-np.abs(x)) / (1.0 + np.exp(-np.abs(x))))

    def backward_fn(g):
        _accumulate(a, g * out_data * (1.0 - out_data))

    return _node(out_data, (a,), backward_fn)


def relu(a: Tensor) -> Tensor:
    out_data = np.maximum(a.data, 0.0)

    def backward_fn(g):
        _accumulate(a, g * (a.data > 0))

    return _node(out_data, (a,), backward_fn)


# -- reductions and normalizers -----------------------------------------


def _check_axis(a: Tensor, axis: int, op: str):
    if not -a.ndim <= axis < a.ndim:
        raise ShapeError(f"{op}: axis {axis} out of range for shape {a.shape}")
    if a.shape[axis] == 0:
        raise ShapeError(f"{op}: empty axis {axis} in shape {a.shape}")


def tsum(a: Tensor, axis=None) -> Tensor:
    if axis is not None:
        _check_axis(a, axis, "sum")
    out_data = a.data.sum(axis=axis)

    def backward_fn(g):
        if axis is None:
            _accumulate(a, np.full(a.shape, g, dtype=np.float64))
        else:
            _accumulate(a, np.broadcast_to(np.expand_dims(g, axis), a.shape).copy())

    return _node(out_data, (a,), backward_fn)


def softmax(a: Tensor, axis: int = -1) -> Tensor:
    _check_axis(a, axis, "softmax")
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    out_data = e / e.sum(axis=axis, keepdims=True)

    def backward_fn(g):
        inner = (g * out_data).sum(axis=axis, keepdims=True)
        _accumulate(a, out_data * (g - inner))

    return _node(out_data, (a,), backward_fn)


def log_softmax(a: Tensor, axis: int = -1) -> Tensor:
    _check_axis(a, axis, "log_softmax")
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=axis, keepdims=True))
    out_data = shifted - lse

    def backward_fn(g):
        soft = np.exp(out_data)
        _accumulate(a, g - soft * g.sum(axis=axis, keepdims=True))

    return _node(out_data, (a,), backward_fn)


def logsumexp(a: Tensor, axis: int = 0) -> Tensor:
    """log(sum(exp(a))) along ``axis``, computed with max-subtraction."""
    _check_axis(a, axis, "logsumexp")
    m = a.data.max(axis=axis, keepdims=True)
    out_keep = m + np.log(np.exp(a.data - m).sum(axis=axis, keepdims=True))
    out_data = np.squeeze(out_keep, axis=axis)

    def backward_fn(g):
        soft = np.exp(a.data - out_keep)
        _accumulate(a, soft * np.expand_dims(g, axis))

    return _node(out_data, (a,), backward_fn)


# -- structural ops ------------------------------------------------------


def concat(tensors, axis: int = 0) -> Tensor:
    tensors = [_ensure(t) for t in tensors]
    if not tensors:
        raise ShapeError("concat: need at least one tensor")
    base = list(tensors[0].shape)
    for t in tensors[1:]:
        other = list(t.shape)
        if len(other) != len(base) or any(
            i != axis and other[i] != base[i] for i in range(len(base))
        ):
            raise ShapeError(f"concat: shapes {tensors[0].shape} and {t.shape} differ off-axis")
    out_data = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.shape[axis] for t in tensors]

    def backward_fn(g):
        offset = 0
        for t, n in zip(tensors, sizes):
            sl = [slice(None)] * g.ndim
            sl[axis] = slice(offset, offset + n)
            _accumulate(t, g[tuple(sl)])
            offset += n

    return _node(out_data, tensors, backward_fn)


def stack_rows(tensors) -> Tensor:
    """Stack equal-length 1-D tensors into a matrix, one per row."""
    return concat([reshape(_ensure(t), (1, _ensure(t).size)) for t in tensors], axis=0)


def reshape(a: Tensor, shape) -> Tensor:
    out_data = a.data.reshape(shape)

    def backward_fn(g):
        _accumulate(a, g.reshape(a.shape))

    return _node(out_data, (a,), backward_fn)


def transpose(a: Tensor) -> Tensor:
    if a.ndim != 2:
        raise ShapeError(f"transpose: expected 2-D, got shape {a.shape}")
    out_data = a.data.T

    def backward_fn(g):
        _accumulate(a, g.T)

    return _node(out_data, (a,), backward_fn)


def take(a: Tensor, key) -> Tensor:
    """Numpy-style indexing; gradients scatter-add back into the source.

    Covers row slicing, embedding lookup (integer-array rows), and paired
    fancy indexing like ``A[(rows, cols)]``.
    """
    out_data = a.data[key]
    fancy = isinstance(key, (np.ndarray, list)) or (
        isinstance(key, tuple) and any(isinstance(k, (np.ndarray, list)) for k in key)
    )

    def backward_fn(g):
        gz = np.zeros(a.shape, dtype=np.float64)
        if fancy:
            np.add.at(gz, key, g)
        else:
            gz[key] += g
        _accumulate(a, gz)

    return _node(out_data, (a,), backward_fn)


def dropout(a: Tensor, rate: float, rng: np.random.Generator) -> Tensor:
    """Inverted dropout; ``rate`` 0 returns the input tensor unchanged."""
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
    if rate == 0.0:
        return a
    mask = (rng.random(a.shape) >= rate) / (1.0 - rate)
    out_data = a.data * mask

    def backward_fn(g):
        _accumulate(a, g * mask)

    return _node(out_data, (a,), backward_fn)


# -- reverse pass --------------------------------------------------------


def backward(loss: Tensor):
    """Populate ``grad`` on every tensor reachable from a scalar loss."""
    if loss.shape != ():
        raise ShapeError(f"backward: loss must be scalar, got shape {loss.shape}")
    topo = []
    visited = set()
    stack = [(loss, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            topo.append(node)
            continue
        if id(node) in visited or not node.requires_grad:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            stack.append((p, False))
    loss.grad = np.asarray(1.0)
    for node in reversed(topo):
        if node._backward_fn is not None and node.grad is not None:
            node._backward_fn(node.grad)
