"""
Embedding layer: positional buckets, hashed crosses, padding and table lookups.

Examples are first encoded into integer id matrices (``EncodedBatch``) and then
looked up in the ``EmbeddingTables``. A batch of B examples produces a
row-stacked sequence matrix of B*(n+1) rows: n history slots (right-aligned,
padding on the left) followed by the target slot.
"""

import hashlib
import logging
from collections import Counter
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from bstlab.core.config import CATEGORY_FIELD, ITEM_FIELD, CrossSpec, FeatureSchema, FieldSpec
from bstlab.core.errors import FeatureError
from bstlab.features.records import PAD_EVENT, BehaviorEvent, Example
from bstlab.tensor import Tensor, concat_cols, gather_rows
from bstlab.tensor.init import xavier_uniform

logger = logging.getLogger(__name__)

ITEM_TABLE = "emb.item_id"
CATEGORY_TABLE = "emb.category_id"
POSITION_TABLE = "emb.position"


def field_table_name(spec: FieldSpec) -> str:
    return f"emb.field.{spec.name}"


def cross_table_name(spec: CrossSpec) -> str:
    return f"emb.cross.{spec.name}"


# =============================================================================
# Scalar feature transforms
# =============================================================================


def position_delta(t_request: int, t_click: int) -> int:
    """pos(v_i) = t(v_t) - t(v_i)."""
    if t_click > t_request:
        raise FeatureError(f"Click at {t_click} is after request time {t_request}")
    return t_request - t_click


def bucketize_position(delta: int, buckets: int) -> int:
    """floor(log2(delta + 1)) clamped to [0, buckets - 1]."""
    if delta < 0:
        raise FeatureError(f"Position delta must be non-negative, got {delta}")
    return min((delta + 1).bit_length() - 1, buckets - 1)


def hash_cross(left_value: int, right_value: int, table_size: int, seed: int = 17) -> int:
    """Order-sensitive, seed-fixed hash of a value pair into [1, table_size)."""
    if table_size < 2:
        raise FeatureError(f"Cross table needs at least 2 rows, got {table_size}")
    digest = hashlib.md5(f"{seed}|{left_value}|{right_value}".encode()).digest()
    return int.from_bytes(digest[:8], "little") % (table_size - 1) + 1


def pad_truncate(history: Sequence[BehaviorEvent], n: int) -> tuple[list[BehaviorEvent], np.ndarray]:
    """
    Keep the n most recent events; left-pad shorter histories.

    Returns:
        (events, mask) with exactly n slots; mask is True on real events.
    """
    if n < 1:
        raise FeatureError(f"Sequence length must be at least 1, got {n}")
    recent = list(history[-n:])
    events = [PAD_EVENT] * (n - len(recent)) + recent
    mask = np.array([not e.is_padding for e in events], dtype=bool)
    return events, mask


# =============================================================================
# Encoding
# =============================================================================


@dataclass
class OovTally:
    """Counts of out-of-vocabulary ids mapped to the reserved row 0."""

    counts: Counter = field(default_factory=Counter)

    def record(self, name: str) -> None:
        self.counts[name] += 1

    @property
    def total(self) -> int:
        return sum(self.counts.values())


@dataclass
class EncodedBatch:
    """Integer ids for B examples; sequence matrices carry n history slots plus the target."""

    item_ids: np.ndarray
    category_ids: np.ndarray
    buckets: np.ndarray
    mask: np.ndarray
    field_ids: np.ndarray
    cross_ids: np.ndarray
    labels: np.ndarray

    @property
    def size(self) -> int:
        return self.item_ids.shape[0]

    @property
    def seq_len(self) -> int:
        return self.item_ids.shape[1]

    @property
    def history_mask(self) -> np.ndarray:
        return self.mask[:, :-1]

    def take(self, indices: np.ndarray | slice) -> "EncodedBatch":
        """Sub-batch in the order given by ``indices``."""
        return EncodedBatch(
            item_ids=self.item_ids[indices],
            category_ids=self.category_ids[indices],
            buckets=self.buckets[indices],
            mask=self.mask[indices],
            field_ids=self.field_ids[indices],
            cross_ids=self.cross_ids[indices],
            labels=self.labels[indices],
        )


def _lookup_id(value: int, spec: FieldSpec, tally: OovTally | None) -> int:
    if 0 <= value < spec.vocab_size:
        return value
    if tally is not None:
        tally.record(spec.name)
    return 0


def _cross_value(example: Example, name: str) -> int:
    if name == ITEM_FIELD:
        return example.target.item_id
    if name == CATEGORY_FIELD:
        return example.target.category_id
    return example.other_features[name]


def encode_examples(
    examples: Sequence[Example],
    schema: FeatureSchema,
    tally: OovTally | None = None,
) -> EncodedBatch:
    """
    Turn examples into id matrices under ``schema``.

    Raises:
        FeatureError: If an example lacks a schema field or has a future event.
    """
    n = schema.max_len
    size = len(examples)
    item_ids = np.zeros((size, n + 1), dtype=np.int64)
    category_ids = np.zeros((size, n + 1), dtype=np.int64)
    buckets = np.zeros((size, n + 1), dtype=np.int64)
    mask = np.zeros((size, n + 1), dtype=bool)
    field_ids = np.zeros((size, len(schema.fields)), dtype=np.int64)
    cross_ids = np.zeros((size, len(schema.crosses)), dtype=np.int64)
    labels = np.zeros(size, dtype=np.float64)

    for row, example in enumerate(examples):
        t_request = example.request_time
        events, slot_mask = pad_truncate(example.history, n)
        for slot, (event, real) in enumerate(zip(events, slot_mask, strict=True)):
            if not real:
                continue
            item_ids[row, slot] = _lookup_id(event.item_id, schema.item, tally)
            category_ids[row, slot] = _lookup_id(event.category_id, schema.category, tally)
            buckets[row, slot] = bucketize_position(
                position_delta(t_request, event.timestamp), schema.position_buckets
            )
        mask[row, :n] = slot_mask
        item_ids[row, n] = _lookup_id(example.target.item_id, schema.item, tally)
        category_ids[row, n] = _lookup_id(example.target.category_id, schema.category, tally)
        buckets[row, n] = bucketize_position(0, schema.position_buckets)
        mask[row, n] = True

        for col, spec in enumerate(schema.fields):
            if spec.name not in example.other_features:
                raise FeatureError(f"Example is missing field '{spec.name}'", field=spec.name)
            field_ids[row, col] = _lookup_id(example.other_features[spec.name], spec, tally)
        for col, cross in enumerate(schema.crosses):
            try:
                left = _cross_value(example, cross.left)
                right = _cross_value(example, cross.right)
            except KeyError as e:
                raise FeatureError(f"Example is missing field {e} for cross {cross.name}", field=str(e))
            cross_ids[row, col] = hash_cross(left, right, cross.table_size, schema.hash_seed)
        labels[row] = example.label

    if tally is not None and tally.total:
        logger.debug(f"OOV lookups so far: {dict(tally.counts)}")

    return EncodedBatch(item_ids, category_ids, buckets, mask, field_ids, cross_ids, labels)


def as_batch(
    examples: Example | Sequence[Example] | EncodedBatch,
    schema: FeatureSchema,
    tally: OovTally | None = None,
) -> EncodedBatch:
    """Accept one example, a list, or an already encoded batch."""
    if isinstance(examples, EncodedBatch):
        return examples
    if isinstance(examples, Example):
        return encode_examples([examples], schema, tally)
    return encode_examples(list(examples), schema, tally)


# =============================================================================
# Tables and lookups
# =============================================================================


@dataclass
class EmbeddingTables:
    """Named embedding tables; row 0 of each is the padding/unknown row."""

    tensors: dict[str, Tensor]

    @property
    def item(self) -> Tensor:
        return self.tensors[ITEM_TABLE]

    @property
    def category(self) -> Tensor:
        return self.tensors[CATEGORY_TABLE]

    @property
    def position(self) -> Tensor:
        return self.tensors[POSITION_TABLE]

    def field(self, spec: FieldSpec) -> Tensor:
        return self.tensors[field_table_name(spec)]

    def cross(self, spec: CrossSpec) -> Tensor:
        return self.tensors[cross_table_name(spec)]


def embedding_shapes(schema: FeatureSchema) -> dict[str, tuple[int, int]]:
    """Expected shape of every table under ``schema``."""
    shapes = {
        ITEM_TABLE: (schema.item.vocab_size, schema.item.width),
        CATEGORY_TABLE: (schema.category.vocab_size, schema.category.width),
        POSITION_TABLE: (schema.position_buckets, schema.position_width),
    }
    for spec in schema.fields:
        shapes[field_table_name(spec)] = (spec.vocab_size, spec.width)
    for cross in schema.crosses:
        shapes[cross_table_name(cross)] = (cross.table_size, cross.width)
    return shapes


def init_embedding_tables(schema: FeatureSchema, rng: np.random.Generator) -> EmbeddingTables:
    return EmbeddingTables(
        {
            name: xavier_uniform(name, rows, cols, rng)
            for name, (rows, cols) in embedding_shapes(schema).items()
        }
    )


def embed_slots(batch: EncodedBatch, tables: EmbeddingTables, with_position: bool) -> Tensor:
    """Row-stacked slot embeddings [B*(n+1) x width]: item ⊕ category (⊕ position)."""
    parts = [
        gather_rows(tables.item, batch.item_ids.reshape(-1)),
        gather_rows(tables.category, batch.category_ids.reshape(-1)),
    ]
    if with_position:
        parts.append(gather_rows(tables.position, batch.buckets.reshape(-1)))
    return concat_cols(parts)


def embed_sequence(
    example: Example | Sequence[Example] | EncodedBatch,
    tables: EmbeddingTables,
    schema: FeatureSchema,
    tally: OovTally | None = None,
) -> tuple[Tensor, np.ndarray]:
    """
    Sequence matrix E and its mask.

    For one example E is [(n+1) x d_model]; a batch of B examples is row-stacked
    into [B*(n+1) x d_model]. The last slot of each example is the target.
    Ids outside a vocabulary read row 0 and are counted in ``tally``.
    """
    batch = as_batch(example, schema, tally)
    return embed_slots(batch, tables, with_position=True), batch.mask.reshape(-1)


def embed_target(batch: EncodedBatch, tables: EmbeddingTables) -> Tensor:
    """Target item ⊕ category embedding [B x d_item_category]."""
    return concat_cols(
        [
            gather_rows(tables.item, batch.item_ids[:, -1]),
            gather_rows(tables.category, batch.category_ids[:, -1]),
        ]
    )


def embed_other_features(
    example: Example | Sequence[Example] | EncodedBatch,
    tables: EmbeddingTables,
    schema: FeatureSchema,
    tally: OovTally | None = None,
) -> Tensor:
    """Concatenated field and cross embeddings [B x d_other], in schema order."""
    batch = as_batch(example, schema, tally)
    parts = [gather_rows(tables.field(spec), batch.field_ids[:, col]) for col, spec in enumerate(schema.fields)]
    parts += [
        gather_rows(tables.cross(spec), batch.cross_ids[:, col])
        for col, spec in enumerate(schema.crosses)
    ]
    if not parts:
        return Tensor(np.zeros((batch.size, 0)))
    return concat_cols(parts)
