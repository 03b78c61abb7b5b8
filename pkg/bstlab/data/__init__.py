"""Synthetic datasets and their JSONL store."""

from bstlab.data.jsonl import parse_record, read_jsonl, write_jsonl
from bstlab.data.synth import (
    GenStats,
    SyntheticDataset,
    click_probability,
    generate_dataset,
    recency_weights,
    synthesize,
)

__all__ = [
    "GenStats",
    "SyntheticDataset",
    "click_probability",
    "generate_dataset",
    "parse_record",
    "read_jsonl",
    "recency_weights",
    "synthesize",
    "write_jsonl",
]
