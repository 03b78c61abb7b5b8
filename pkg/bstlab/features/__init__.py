"""Example records and the embedding layer."""

from bstlab.features.embedding import (
    EmbeddingTables,
    EncodedBatch,
    OovTally,
    as_batch,
    bucketize_position,
    embed_other_features,
    embed_sequence,
    embed_slots,
    embed_target,
    embedding_shapes,
    encode_examples,
    hash_cross,
    init_embedding_tables,
    pad_truncate,
    position_delta,
)
from bstlab.features.records import PAD_EVENT, BehaviorEvent, Example

__all__ = [
    "BehaviorEvent",
    "Example",
    "PAD_EVENT",
    "EmbeddingTables",
    "EncodedBatch",
    "OovTally",
    "as_batch",
    "bucketize_position",
    "embed_other_features",
    "embed_sequence",
    "embed_slots",
    "embed_target",
    "embedding_shapes",
    "encode_examples",
    "hash_cross",
    "init_embedding_tables",
    "pad_truncate",
    "position_delta",
]
