"""
Forward passes of the four predictors and the kind dispatch.

Every forward accepts one Example, a list of them, or an EncodedBatch and
returns click probabilities [B x 1] in input order. All models share the
embedding tables and the MLP head:

    BST        z = flatten(Transformer(E)) ⊕ other
    WDL        z = other ⊕ target
    WDL(+Seq)  z = mean(history) ⊕ target ⊕ other
    DIN-lite   z = attention_pool(history | target) ⊕ target ⊕ other
"""

import logging
from collections.abc import Callable, Sequence

import numpy as np

from bstlab.core.config import ModelConfig, ModelKind
from bstlab.core.errors import ConfigError
from bstlab.features.embedding import (
    EncodedBatch,
    OovTally,
    as_batch,
    embed_other_features,
    embed_slots,
    embed_target,
)
from bstlab.features.records import Example
from bstlab.models.head import mlp_head
from bstlab.models.params import ModelParams
from bstlab.nn.transformer import stack_blocks
from bstlab.tensor import (
    Mode,
    Tensor,
    concat_cols,
    gather_rows,
    matmul,
    mul,
    reshape,
    softmax_rows,
    sum_cols,
)

logger = logging.getLogger(__name__)

ExampleInput = Example | Sequence[Example] | EncodedBatch
ForwardFn = Callable[..., Tensor]


def _head(z: Tensor, params: ModelParams, config: ModelConfig, mode: Mode, rng) -> Tensor:
    return mlp_head(
        z,
        params.mlp,
        mode,
        rng,
        slope=config.block.leaky_slope,
        dropout_rate=config.mlp_dropout,
    )


def _slot_sum(H: Tensor, weights: Tensor, batch_size: int, seq_len: int) -> Tensor:
    """Per-example weighted sum of stacked slot rows: [B*L x d] -> [B x d]."""
    width = H.cols
    spread = reshape(mul(H, weights), batch_size, seq_len * width)
    return matmul(spread, Tensor(np.tile(np.eye(width), (seq_len, 1))))


def _history_keep(batch: EncodedBatch) -> np.ndarray:
    """[B x L] mask of real history slots; the target column is always False."""
    keep = batch.mask.copy()
    keep[:, -1] = False
    return keep


def bst_forward(
    example: ExampleInput,
    params: ModelParams,
    config: ModelConfig,
    mode: Mode = Mode.EVAL,
    rng: np.random.Generator | None = None,
) -> Tensor:
    """Transformer over history plus target, every output row flattened into the head."""
    schema = config.schema
    batch = as_batch(example, schema)
    seq_len = batch.seq_len
    mask = batch.mask.reshape(-1)

    E = embed_slots(batch, params.embeddings, with_position=True)
    O = stack_blocks(E, params.blocks, config.block, mode, rng, mask, seq_len=seq_len)
    O = mul(O, Tensor(mask.astype(np.float64).reshape(-1, 1)))
    flat = reshape(O, batch.size, seq_len * O.cols)

    z = concat_cols([flat, embed_other_features(batch, params.embeddings, schema)])
    return _head(z, params, config, mode, rng)


def wdl_forward(
    example: ExampleInput,
    params: ModelParams,
    config: ModelConfig,
    mode: Mode = Mode.EVAL,
    rng: np.random.Generator | None = None,
) -> Tensor:
    """Embedding&MLP on other features and the target; history is never read."""
    batch = as_batch(example, config.schema)
    tables = params.embeddings
    z = concat_cols([embed_other_features(batch, tables, config.schema), embed_target(batch, tables)])
    return _head(z, params, config, mode, rng)


def wdl_seq_forward(
    example: ExampleInput,
    params: ModelParams,
    config: ModelConfig,
    mode: Mode = Mode.EVAL,
    rng: np.random.Generator | None = None,
) -> Tensor:
    """WDL plus the mean of real history item⊕category embeddings (zero when empty)."""
    batch = as_batch(example, config.schema)
    tables = params.embeddings
    keep = _history_keep(batch)
    counts = keep.sum(axis=1, keepdims=True)
    weights = np.divide(keep, counts, out=np.zeros(keep.shape), where=counts > 0)

    H = embed_slots(batch, tables, with_position=False)
    pooled = _slot_sum(H, Tensor(weights.reshape(-1, 1)), batch.size, batch.seq_len)

    z = concat_cols(
        [pooled, embed_target(batch, tables), embed_other_features(batch, tables, config.schema)]
    )
    return _head(z, params, config, mode, rng)


def din_attention(
    batch: EncodedBatch,
    H: Tensor,
    target: Tensor,
    A: Tensor,
) -> Tensor:
    """
    Target-attention weights [B x L]: softmax_i(e_i · A · e_target) over real history slots.

    Rows without any history come back all zero.
    """
    size, seq_len = batch.size, batch.seq_len
    keep = _history_keep(batch)
    has_history = keep.any(axis=1)
    keep[~has_history] = True

    repeated = gather_rows(target, np.repeat(np.arange(size), seq_len))
    scores = sum_cols(mul(matmul(H, A), repeated))
    weights = softmax_rows(reshape(scores, size, seq_len), keep)
    return mul(weights, Tensor(has_history.astype(np.float64).reshape(-1, 1)))


def din_lite_forward(
    example: ExampleInput,
    params: ModelParams,
    config: ModelConfig,
    mode: Mode = Mode.EVAL,
    rng: np.random.Generator | None = None,
) -> Tensor:
    """Bilinear target-attention pooling of history item⊕category embeddings."""
    batch = as_batch(example, config.schema)
    tables = params.embeddings
    H = embed_slots(batch, tables, with_position=False)
    target = embed_target(batch, tables)

    weights = din_attention(batch, H, target, params.din_attention)
    pooled = _slot_sum(H, reshape(weights, batch.size * batch.seq_len, 1), batch.size, batch.seq_len)

    z = concat_cols([pooled, target, embed_other_features(batch, tables, config.schema)])
    return _head(z, params, config, mode, rng)


FORWARDS: dict[ModelKind, ForwardFn] = {
    ModelKind.BST: bst_forward,
    ModelKind.WDL: wdl_forward,
    ModelKind.WDL_SEQ: wdl_seq_forward,
    ModelKind.DIN_LITE: din_lite_forward,
}


def get_forward(kind: ModelKind | str) -> ForwardFn:
    """
    Forward function for a model kind.

    Raises:
        ConfigError: If the kind is unknown.
    """
    try:
        return FORWARDS[ModelKind(kind)]
    except (ValueError, KeyError):
        raise ConfigError(
            f"Unknown model kind: {kind}",
            details={"known": [k.value for k in ModelKind]},
        )


def forward(
    example: ExampleInput,
    params: ModelParams,
    config: ModelConfig,
    mode: Mode = Mode.EVAL,
    rng: np.random.Generator | None = None,
) -> Tensor:
    """Forward pass of ``config.kind``."""
    return get_forward(config.kind)(example, params, config, mode, rng)


def predict(
    examples: ExampleInput,
    params: ModelParams,
    config: ModelConfig | None = None,
    batch_size: int = 512,
    tally: OovTally | None = None,
) -> np.ndarray:
    """
    Eval-mode click probabilities, one per example in input order.

    A single Example yields a length-1 array.
    """
    config = config or params.config
    fn = get_forward(config.kind)
    batch = as_batch(examples, config.schema, tally)
    if batch.size == 0:
        return np.zeros(0)
    chunks = [
        fn(batch.take(slice(start, start + batch_size)), params, config, Mode.EVAL, None)
        .numpy()
        .reshape(-1)
        for start in range(0, batch.size, batch_size)
    ]
    return np.concatenate(chunks)
