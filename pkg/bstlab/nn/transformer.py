"""
Transformer layer for behavior sequences.

Scaled dot-product attention, multi-head projection with an output matrix W^H,
and the post-norm residual FFN sublayer with dropout and LeakyReLU. Inputs may
be a single sequence [L x d_model] or B sequences row-stacked [B*L x d_model];
in the stacked case attention runs per sequence over [B*L x L] scores, so
sequences never mix and cost grows linearly with B.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from bstlab.core.config import BlockConfig
from bstlab.core.errors import KernelError, ShapeError
from bstlab.tensor import (
    Mode,
    Tensor,
    add,
    concat_cols,
    dropout,
    layer_norm,
    leaky_relu,
    matmul,
    scale,
    segment_matmul,
    segment_outer,
    softmax_rows,
)
from bstlab.tensor.init import ones, xavier_uniform, zeros

logger = logging.getLogger(__name__)


@dataclass
class BlockParams:
    """Parameters of one Transformer block."""

    wq: list[Tensor]
    wk: list[Tensor]
    wv: list[Tensor]
    wh: Tensor
    w1: Tensor
    b1: Tensor
    w2: Tensor
    b2: Tensor
    ln1_gain: Tensor
    ln1_bias: Tensor
    ln2_gain: Tensor
    ln2_bias: Tensor

    @property
    def heads(self) -> int:
        return len(self.wq)

    def named(self) -> dict[str, Tensor]:
        tensors = [*self.wq, *self.wk, *self.wv, self.wh, self.w1, self.b1, self.w2, self.b2]
        tensors += [self.ln1_gain, self.ln1_bias, self.ln2_gain, self.ln2_bias]
        return {t.name or "": t for t in tensors}

    @classmethod
    def from_named(cls, tensors: dict[str, Tensor], prefix: str, heads: int) -> BlockParams:
        return cls(
            wq=[tensors[f"{prefix}.attn.wq.{i}"] for i in range(heads)],
            wk=[tensors[f"{prefix}.attn.wk.{i}"] for i in range(heads)],
            wv=[tensors[f"{prefix}.attn.wv.{i}"] for i in range(heads)],
            wh=tensors[f"{prefix}.attn.wh"],
            w1=tensors[f"{prefix}.ffn.w1"],
            b1=tensors[f"{prefix}.ffn.b1"],
            w2=tensors[f"{prefix}.ffn.w2"],
            b2=tensors[f"{prefix}.ffn.b2"],
            ln1_gain=tensors[f"{prefix}.ln1.gain"],
            ln1_bias=tensors[f"{prefix}.ln1.bias"],
            ln2_gain=tensors[f"{prefix}.ln2.gain"],
            ln2_bias=tensors[f"{prefix}.ln2.bias"],
        )


def block_shapes(config: BlockConfig, prefix: str) -> dict[str, tuple[int, int]]:
    """Expected parameter shapes of one block."""
    d, d_head, d_ff = config.d_model, config.d_head, config.ffn_width
    shapes: dict[str, tuple[int, int]] = {}
    for kind in ("wq", "wk", "wv"):
        for i in range(config.heads):
            shapes[f"{prefix}.attn.{kind}.{i}"] = (d, d_head)
    shapes[f"{prefix}.attn.wh"] = (config.heads * d_head, d)
    shapes[f"{prefix}.ffn.w1"] = (d, d_ff)
    shapes[f"{prefix}.ffn.b1"] = (1, d_ff)
    shapes[f"{prefix}.ffn.w2"] = (d_ff, d)
    shapes[f"{prefix}.ffn.b2"] = (1, d)
    for ln in ("ln1", "ln2"):
        shapes[f"{prefix}.{ln}.gain"] = (1, d)
        shapes[f"{prefix}.{ln}.bias"] = (1, d)
    return shapes


def init_block(config: BlockConfig, prefix: str, rng: np.random.Generator) -> BlockParams:
    """Xavier-uniform matrices, zero biases, unit layer-norm gains."""
    tensors: dict[str, Tensor] = {}
    for name, (rows, cols) in block_shapes(config, prefix).items():
        if name.endswith(".gain"):
            tensors[name] = ones(name, rows, cols)
        elif name.endswith((".bias", ".b1", ".b2")):
            tensors[name] = zeros(name, rows, cols)
        else:
            tensors[name] = xavier_uniform(name, rows, cols, rng)
    return BlockParams.from_named(tensors, prefix, config.heads)


def attention_mask(key_mask: np.ndarray | None, rows: int, seq_len: int | None = None) -> np.ndarray:
    """
    Boolean [rows x seq_len] mask: True where a query may attend to a key of its own sequence.

    Row r belongs to sequence r // seq_len and column j is key j of that
    sequence, so stacked sequences never see each other and the mask grows
    linearly with the batch.

    Args:
        key_mask: Per-position validity (length ``rows``), or an already built
            2-D mask which is returned unchanged. None means all valid.
        rows: Total row count (L, or B*L when stacked).
        seq_len: Length of each stacked sequence; None means one sequence.
    """
    if key_mask is not None and np.ndim(key_mask) == 2:
        mask2d = np.asarray(key_mask, dtype=bool)
        width = mask2d.shape[1]
        if mask2d.shape[0] != rows or width == 0 or rows % width:
            raise ShapeError(f"attention mask {mask2d.shape} does not fit {rows} rows", mask2d.shape)
        return mask2d
    seq_len = rows if seq_len is None else seq_len
    keys = np.ones(rows, dtype=bool) if key_mask is None else np.asarray(key_mask, dtype=bool)
    if keys.shape != (rows,):
        raise ShapeError(f"key mask {keys.shape} does not fit {rows} rows", keys.shape)
    if seq_len <= 0 or rows % seq_len:
        raise ShapeError(f"{rows} stacked rows are not a multiple of seq_len={seq_len}", (rows,))
    return np.repeat(keys.reshape(-1, seq_len), seq_len, axis=0)


def attention_weights(
    Q: Tensor, K: Tensor, mask: np.ndarray | None = None, seq_len: int | None = None
) -> Tensor:
    """[rows x L] softmax(QK^T / sqrt(d_head)) per sequence, masked key columns at -inf."""
    if Q.cols != K.cols:
        raise ShapeError(f"Q {Q.shape} and K {K.shape} differ in width", Q.shape, K.shape)
    mask2d = attention_mask(mask, K.rows, seq_len)
    logits = scale(segment_outer(Q, K, mask2d.shape[1]), 1.0 / np.sqrt(Q.cols))
    return softmax_rows(logits, mask2d)


def scaled_dot_attention(
    Q: Tensor,
    K: Tensor,
    V: Tensor,
    mask: np.ndarray | None = None,
    seq_len: int | None = None,
) -> Tensor:
    """
    Attention(Q, K, V) = softmax(QK^T / sqrt(d_head)) V, per stacked sequence.

    Raises:
        MaskError: If every key is masked for some query.
    """
    if K.rows != V.rows:
        raise ShapeError(f"K {K.shape} and V {V.shape} differ in length", K.shape, V.shape)
    weights = attention_weights(Q, K, mask, seq_len)
    return segment_matmul(weights, V, weights.cols)


def multi_head(
    E: Tensor,
    params: BlockParams,
    mask: np.ndarray | None = None,
    seq_len: int | None = None,
) -> Tensor:
    """S = Concat(head_1..head_h) W^H with head_i = Attention(E W^Q_i, E W^K_i, E W^V_i)."""
    mask2d = attention_mask(mask, E.rows, seq_len)
    heads = [
        scaled_dot_attention(matmul(E, wq), matmul(E, wk), matmul(E, wv), mask2d)
        for wq, wk, wv in zip(params.wq, params.wk, params.wv, strict=True)
    ]
    return matmul(concat_cols(heads), params.wh)


def transformer_block(
    X: Tensor,
    params: BlockParams,
    config: BlockConfig,
    mode: Mode = Mode.EVAL,
    rng: np.random.Generator | None = None,
    mask: np.ndarray | None = None,
    seq_len: int | None = None,
) -> Tensor:
    """
    One post-norm block.

    S' = LayerNorm(X + Dropout(MH(X)))
    F  = LayerNorm(S' + Dropout(LeakyReLU(S' W1 + b1) W2 + b2))
    """
    mask2d = attention_mask(mask, X.rows, seq_len)
    attended = multi_head(X, params, mask2d)
    s_prime = layer_norm(
        add(X, dropout(attended, config.dropout, mode, rng)),
        params.ln1_gain,
        params.ln1_bias,
        config.eps,
    )
    hidden = leaky_relu(add(matmul(s_prime, params.w1), params.b1), config.leaky_slope)
    ffn = add(matmul(hidden, params.w2), params.b2)
    return layer_norm(
        add(s_prime, dropout(ffn, config.dropout, mode, rng)),
        params.ln2_gain,
        params.ln2_bias,
        config.eps,
    )


def stack_blocks(
    E: Tensor,
    blocks: list[BlockParams],
    config: BlockConfig,
    mode: Mode = Mode.EVAL,
    rng: np.random.Generator | None = None,
    mask: np.ndarray | None = None,
    seq_len: int | None = None,
) -> Tensor:
    """Apply ``blocks`` in order, each feeding the next."""
    if not blocks:
        raise KernelError("stack_blocks needs at least one block")
    mask2d = attention_mask(mask, E.rows, seq_len)
    out = E
    for params in blocks:
        out = transformer_block(out, params, config, mode, rng, mask2d)
    return out
