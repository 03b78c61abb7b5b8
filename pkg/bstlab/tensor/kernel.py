"""
Dense rank-2 tensor kernel with reverse-mode gradients.

Every operation returns a new Tensor that records its parents and a backward
closure mapping the output gradient to one gradient per parent. ``backward``
walks the recorded graph once in reverse topological order and returns the
gradients of the named parameters.
"""

from __future__ import annotations

import logging
from collections.abc import Callable, Iterable, Mapping, Sequence
from enum import Enum

import numpy as np

from bstlab.core.errors import KernelError, MaskError, ShapeError

logger = logging.getLogger(__name__)

DTYPE = np.float64
PROB_CLAMP = 1e-12

BackwardFn = Callable[[np.ndarray], Sequence[np.ndarray | None]]


class Mode(str, Enum):
    """Forward-pass mode; only dropout distinguishes them."""

    TRAIN = "train"
    EVAL = "eval"


class Tensor:
    """Row-major rank-2 float64 array plus the record needed for backward."""

    __slots__ = ("data", "name", "_parents", "_backward")

    def __init__(
        self,
        data: np.ndarray | Sequence[float] | Sequence[Sequence[float]] | float,
        parents: tuple[Tensor, ...] = (),
        backward: BackwardFn | None = None,
        name: str | None = None,
    ) -> None:
        array = np.array(data, dtype=DTYPE)
        if array.ndim == 0:
            array = array.reshape(1, 1)
        elif array.ndim == 1:
            array = array.reshape(1, -1)
        elif array.ndim > 2:
            raise ShapeError(f"Tensors are rank <= 2, got shape {array.shape}", array.shape)
        self.data = array
        self.name = name
        self._parents = parents
        self._backward = backward

    @classmethod
    def param(cls, name: str, data: np.ndarray) -> Tensor:
        """Create a named leaf tensor whose gradient ``backward`` reports."""
        return cls(data, name=name)

    @property
    def shape(self) -> tuple[int, int]:
        rows, cols = self.data.shape
        return rows, cols

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    def item(self) -> float:
        """Value of a 1x1 tensor."""
        if self.data.size != 1:
            raise ShapeError(f"item() needs a 1x1 tensor, got {self.shape}", self.shape)
        return float(self.data[0, 0])

    def numpy(self) -> np.ndarray:
        return self.data

    def __repr__(self) -> str:
        label = f" {self.name}" if self.name else ""
        return f"<Tensor{label} {self.shape}>"

    def __matmul__(self, other: Tensor) -> Tensor:
        return matmul(self, other)

    def __add__(self, other: Tensor) -> Tensor:
        return add(self, other)

    def __mul__(self, other: Tensor | float) -> Tensor:
        if isinstance(other, Tensor):
            return mul(self, other)
        return scale(self, float(other))


def as_tensor(value: Tensor | np.ndarray | float | Sequence) -> Tensor:
    """Wrap constants; tensors pass through unchanged."""
    return value if isinstance(value, Tensor) else Tensor(value)


def _node(data: np.ndarray, parents: tuple[Tensor, ...], backward: BackwardFn) -> Tensor:
    out = Tensor.__new__(Tensor)
    out.data = data
    out.name = None
    out._parents = parents
    out._backward = backward
    return out


def _unbroadcast(grad: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    """Sum a broadcast gradient back down to an operand's shape."""
    if grad.shape == shape:
        return grad
    if shape[0] == 1 and grad.shape[0] != 1:
        grad = grad.sum(axis=0, keepdims=True)
    if shape[1] == 1 and grad.shape[1] != 1:
        grad = grad.sum(axis=1, keepdims=True)
    return grad


def _check_broadcast(a: Tensor, b: Tensor, op: str) -> None:
    for dim in (0, 1):
        if a.shape[dim] != b.shape[dim] and 1 not in (a.shape[dim], b.shape[dim]):
            raise ShapeError(f"{op}: cannot broadcast {a.shape} with {b.shape}", a.shape, b.shape)


# =============================================================================
# Linear algebra and elementwise arithmetic
# =============================================================================


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product a[m x k] @ b[k x n]."""
    if a.cols != b.rows:
        raise ShapeError(
            f"matmul: inner dimensions differ for {a.shape} @ {b.shape}", a.shape, b.shape
        )
    a_data, b_data = a.data, b.data

    def backward(grad: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return grad @ b_data.T, a_data.T @ grad

    return _node(a_data @ b_data, (a, b), backward)


def _segments(x: Tensor, seg_len: int, op: str) -> int:
    if seg_len <= 0 or x.rows % seg_len:
        raise ShapeError(f"{op}: {x.rows} rows are not a multiple of seg_len={seg_len}", x.shape)
    return x.rows // seg_len


def segment_outer(a: Tensor, b: Tensor, seg_len: int) -> Tensor:
    """
    Per-segment a_s @ b_s^T for row-stacked segments of ``seg_len`` rows.

    a and b are [S*seg_len x k]; the result is [S*seg_len x seg_len], row block
    s holding the scores of segment s against its own rows only.
    """
    if a.shape != b.shape:
        raise ShapeError(f"segment_outer: shapes differ {a.shape} vs {b.shape}", a.shape, b.shape)
    count = _segments(a, seg_len, "segment_outer")
    a3 = a.data.reshape(count, seg_len, a.cols)
    b3 = b.data.reshape(count, seg_len, b.cols)

    def backward(grad: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        g3 = grad.reshape(count, seg_len, seg_len)
        grad_a = np.matmul(g3, b3).reshape(a.shape)
        grad_b = np.matmul(g3.transpose(0, 2, 1), a3).reshape(b.shape)
        return grad_a, grad_b

    out = np.matmul(a3, b3.transpose(0, 2, 1)).reshape(count * seg_len, seg_len)
    return _node(out, (a, b), backward)


def segment_matmul(w: Tensor, v: Tensor, seg_len: int) -> Tensor:
    """Per-segment w_s @ v_s with w [S*seg_len x seg_len] and v [S*seg_len x k]."""
    if w.rows != v.rows or w.cols != seg_len:
        raise ShapeError(f"segment_matmul: cannot mix {w.shape} with {v.shape}", w.shape, v.shape)
    count = _segments(v, seg_len, "segment_matmul")
    w3 = w.data.reshape(count, seg_len, seg_len)
    v3 = v.data.reshape(count, seg_len, v.cols)

    def backward(grad: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        g3 = grad.reshape(count, seg_len, v.cols)
        grad_w = np.matmul(g3, v3.transpose(0, 2, 1)).reshape(w.shape)
        grad_v = np.matmul(w3.transpose(0, 2, 1), g3).reshape(v.shape)
        return grad_w, grad_v

    return _node(np.matmul(w3, v3).reshape(v.shape), (w, v), backward)


def transpose(x: Tensor) -> Tensor:
    def backward(grad: np.ndarray) -> tuple[np.ndarray]:
        return (grad.T,)

    return _node(np.ascontiguousarray(x.data.T), (x,), backward)


def add(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise sum with row/column broadcasting of 1-sized dimensions."""
    _check_broadcast(a, b, "add")
    a_shape, b_shape = a.shape, b.shape

    def backward(grad: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return _unbroadcast(grad, a_shape), _unbroadcast(grad, b_shape)

    return _node(a.data + b.data, (a, b), backward)


def mul(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise product with row/column broadcasting."""
    _check_broadcast(a, b, "mul")
    a_data, b_data = a.data, b.data

    def backward(grad: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return (
            _unbroadcast(grad * b_data, a_data.shape),
            _unbroadcast(grad * a_data, b_data.shape),
        )

    return _node(a_data * b_data, (a, b), backward)


def scale(x: Tensor, factor: float) -> Tensor:
    def backward(grad: np.ndarray) -> tuple[np.ndarray]:
        return (grad * factor,)

    return _node(x.data * factor, (x,), backward)


def sum_all(x: Tensor) -> Tensor:
    """Sum of every entry as a 1x1 tensor."""
    shape = x.shape

    def backward(grad: np.ndarray) -> tuple[np.ndarray]:
        return (np.full(shape, grad[0, 0], dtype=DTYPE),)

    return _node(np.array([[x.data.sum()]], dtype=DTYPE), (x,), backward)


def sum_cols(x: Tensor) -> Tensor:
    """Row sums: [m x n] -> [m x 1]."""
    cols = x.cols

    def backward(grad: np.ndarray) -> tuple[np.ndarray]:
        return (np.repeat(grad, cols, axis=1),)

    return _node(x.data.sum(axis=1, keepdims=True), (x,), backward)


# =============================================================================
# Shape plumbing
# =============================================================================


def concat_cols(parts: Sequence[Tensor]) -> Tensor:
    """Horizontal concatenation of tensors with equal row counts."""
    rows = {p.rows for p in parts}
    if len(rows) != 1:
        raise ShapeError(
            f"concat_cols: row counts differ {[p.shape for p in parts]}",
            *[p.shape for p in parts],
        )
    bounds = np.cumsum([0] + [p.cols for p in parts])

    def backward(grad: np.ndarray) -> list[np.ndarray]:
        return [grad[:, bounds[i] : bounds[i + 1]] for i in range(len(parts))]

    return _node(np.concatenate([p.data for p in parts], axis=1), tuple(parts), backward)


def concat_rows(parts: Sequence[Tensor]) -> Tensor:
    """Vertical concatenation of tensors with equal column counts."""
    cols = {p.cols for p in parts}
    if len(cols) != 1:
        raise ShapeError(
            f"concat_rows: column counts differ {[p.shape for p in parts]}",
            *[p.shape for p in parts],
        )
    bounds = np.cumsum([0] + [p.rows for p in parts])

    def backward(grad: np.ndarray) -> list[np.ndarray]:
        return [grad[bounds[i] : bounds[i + 1], :] for i in range(len(parts))]

    return _node(np.concatenate([p.data for p in parts], axis=0), tuple(parts), backward)


def slice_cols(x: Tensor, start: int, stop: int) -> Tensor:
    shape = x.shape

    def backward(grad: np.ndarray) -> tuple[np.ndarray]:
        full = np.zeros(shape, dtype=DTYPE)
        full[:, start:stop] = grad
        return (full,)

    return _node(x.data[:, start:stop].copy(), (x,), backward)


def reshape(x: Tensor, rows: int, cols: int) -> Tensor:
    """Row-major reshape; flattening stacked sequences is exact."""
    if rows * cols != x.data.size:
        raise ShapeError(f"reshape: cannot view {x.shape} as {(rows, cols)}", x.shape)
    shape = x.shape

    def backward(grad: np.ndarray) -> tuple[np.ndarray]:
        return (grad.reshape(shape),)

    return _node(x.data.reshape(rows, cols), (x,), backward)


def gather_rows(table: Tensor, ids: np.ndarray) -> Tensor:
    """Embedding lookup: rows of ``table`` selected by integer ``ids`` (any order, repeats)."""
    index = np.asarray(ids, dtype=np.int64).reshape(-1)
    if index.size and (index.min() < 0 or index.max() >= table.rows):
        raise ShapeError(
            f"gather_rows: ids outside [0, {table.rows}) for table {table.shape}", table.shape
        )
    shape = table.shape

    def backward(grad: np.ndarray) -> tuple[np.ndarray]:
        full = np.zeros(shape, dtype=DTYPE)
        np.add.at(full, index, grad)
        return (full,)

    return _node(table.data[index], (table,), backward)


# =============================================================================
# Nonlinearities and normalisation
# =============================================================================


def softmax_rows(x: Tensor, mask: np.ndarray | None = None) -> Tensor:
    """
    Row-wise softmax over unmasked entries.

    Masked logits are replaced by -inf before the max-subtracted exponent, so
    masked outputs are exactly zero.

    Args:
        x: Logits [m x n].
        mask: Optional boolean [m x n] (or broadcastable [1 x n]); True keeps an entry.

    Raises:
        MaskError: If some row has no unmasked entry.
    """
    logits = x.data
    if mask is not None:
        keep = np.asarray(mask, dtype=bool)
        if keep.ndim == 1:
            keep = keep.reshape(1, -1)
        try:
            keep = np.broadcast_to(keep, x.shape)
        except ValueError:
            raise ShapeError(
                f"softmax_rows: mask {keep.shape} does not fit logits {x.shape}",
                x.shape,
                keep.shape,
            )
        empty = np.flatnonzero(~keep.any(axis=1))
        if empty.size:
            raise MaskError(int(empty[0]))
        logits = np.where(keep, logits, -np.inf)
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    probs = exp / exp.sum(axis=1, keepdims=True)

    def backward(grad: np.ndarray) -> tuple[np.ndarray]:
        inner = (grad * probs).sum(axis=1, keepdims=True)
        return (probs * (grad - inner),)

    return _node(probs, (x,), backward)


def layer_norm(x: Tensor, gain: Tensor, bias: Tensor, eps: float) -> Tensor:
    """Per-row standardisation with population variance, then gain and bias."""
    if eps <= 0:
        raise KernelError(f"layer_norm eps must be positive, got {eps}")
    if gain.shape != (1, x.cols) or bias.shape != (1, x.cols):
        raise ShapeError(
            f"layer_norm: gain {gain.shape} / bias {bias.shape} do not match input {x.shape}",
            x.shape,
            gain.shape,
            bias.shape,
        )
    data = x.data
    mean = data.mean(axis=1, keepdims=True)
    centered = data - mean
    var = (centered * centered).mean(axis=1, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + eps)
    normed = centered * inv_std
    gain_data = gain.data
    n = x.cols

    def backward(grad: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        d_normed = grad * gain_data
        d_x = (inv_std / n) * (
            n * d_normed
            - d_normed.sum(axis=1, keepdims=True)
            - normed * (d_normed * normed).sum(axis=1, keepdims=True)
        )
        d_gain = (grad * normed).sum(axis=0, keepdims=True)
        d_bias = grad.sum(axis=0, keepdims=True)
        return d_x, d_gain, d_bias

    return _node(normed * gain_data + bias.data, (x, gain, bias), backward)


def leaky_relu(x: Tensor, slope: float) -> Tensor:
    """Elementwise max(x, slope * x)."""
    if not 0.0 <= slope < 1.0:
        raise KernelError(f"leaky_relu slope must lie in [0, 1), got {slope}")
    positive = x.data > 0

    def backward(grad: np.ndarray) -> tuple[np.ndarray]:
        return (np.where(positive, grad, grad * slope),)

    return _node(np.where(positive, x.data, x.data * slope), (x,), backward)


def sigmoid(x: Tensor) -> Tensor:
    """Numerically stable logistic function, strictly inside (0, 1)."""
    data = x.data
    e = np.exp(-np.abs(data))
    out = np.where(data >= 0, 1.0 / (1.0 + e), e / (1.0 + e))
    out = np.clip(out, np.finfo(DTYPE).tiny, np.nextafter(1.0, 0.0))

    def backward(grad: np.ndarray) -> tuple[np.ndarray]:
        return (grad * out * (1.0 - out),)

    return _node(out, (x,), backward)


def dropout(
    x: Tensor,
    rate: float,
    mode: Mode,
    rng: np.random.Generator | None = None,
) -> Tensor:
    """
    Inverted dropout.

    Eval mode (or rate 0) returns ``x`` itself. Train mode zeroes each entry
    with probability ``rate`` and scales survivors by 1/(1-rate); the mask is
    drawn from ``rng`` and reused by backward.

    Raises:
        KernelError: If rate is outside [0, 1) or train mode lacks an rng.
    """
    if not 0.0 <= rate < 1.0:
        raise KernelError(f"dropout rate must lie in [0, 1), got {rate}")
    if mode == Mode.EVAL or rate == 0.0:
        return x
    if rng is None:
        raise KernelError("dropout in train mode needs a seeded random stream")
    keep = (rng.random(x.shape) >= rate) / (1.0 - rate)

    def backward(grad: np.ndarray) -> tuple[np.ndarray]:
        return (grad * keep,)

    return _node(x.data * keep, (x,), backward)


def bce_loss(p: Tensor, y: np.ndarray | Sequence[int]) -> Tensor:
    """Mean binary cross-entropy of probabilities [m x 1] against 0/1 labels."""
    labels = np.asarray(y, dtype=DTYPE).reshape(-1, 1)
    if labels.shape != p.shape:
        raise ShapeError(
            f"bce_loss: probabilities {p.shape} vs labels {labels.shape}", p.shape, labels.shape
        )
    raw = p.data
    clipped = np.clip(raw, PROB_CLAMP, 1.0 - PROB_CLAMP)
    m = labels.shape[0]
    losses = -(labels * np.log(clipped) + (1.0 - labels) * np.log(1.0 - clipped))
    inside = (raw >= PROB_CLAMP) & (raw <= 1.0 - PROB_CLAMP)

    def backward(grad: np.ndarray) -> tuple[np.ndarray]:
        d_p = (clipped - labels) / (clipped * (1.0 - clipped)) / m
        return (grad[0, 0] * d_p * inside,)

    return _node(np.array([[losses.mean()]], dtype=DTYPE), (p,), backward)


# =============================================================================
# Reverse pass
# =============================================================================


def _topological_order(root: Tensor) -> list[Tensor]:
    order: list[Tensor] = []
    visited: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for parent in node._parents:
            if id(parent) not in visited:
                stack.append((parent, False))
    return order


def backward(loss: Tensor, params: Mapping[str, Tensor] | Iterable[Tensor]) -> dict[str, np.ndarray]:
    """
    Exact reverse-mode gradients of a 1x1 loss.

    Args:
        loss: Scalar tensor produced by kernel operations.
        params: Named parameters (mapping, or tensors carrying ``name``).

    Returns:
        Gradient per parameter name, same shape as the parameter. Parameters the
        loss does not depend on get zeros.
    """
    if loss.shape != (1, 1):
        raise ShapeError(f"backward needs a 1x1 loss, got {loss.shape}", loss.shape)
    named = (
        dict(params)
        if isinstance(params, Mapping)
        else {p.name or f"param{i}": p for i, p in enumerate(params)}
    )

    grads: dict[int, np.ndarray] = {id(loss): np.ones((1, 1), dtype=DTYPE)}
    for node in reversed(_topological_order(loss)):
        grad = grads.pop(id(node), None) if node._parents else grads.get(id(node))
        if grad is None or node._backward is None:
            continue
        for parent, parent_grad in zip(node._parents, node._backward(grad), strict=True):
            if parent_grad is None:
                continue
            key = id(parent)
            if key in grads:
                grads[key] = grads[key] + parent_grad
            else:
                grads[key] = parent_grad

    result: dict[str, np.ndarray] = {}
    for name, tensor in named.items():
        grad = grads.get(id(tensor))
        result[name] = (
            np.zeros(tensor.shape, dtype=DTYPE) if grad is None else np.array(grad, dtype=DTYPE)
        )
    return result
