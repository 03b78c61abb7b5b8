"""Neural building blocks."""

from bstlab.nn.transformer import (
    BlockParams,
    attention_mask,
    attention_weights,
    block_shapes,
    init_block,
    multi_head,
    scaled_dot_attention,
    stack_blocks,
    transformer_block,
)

__all__ = [
    "BlockParams",
    "attention_mask",
    "attention_weights",
    "block_shapes",
    "init_block",
    "multi_head",
    "scaled_dot_attention",
    "stack_blocks",
    "transformer_block",
]
