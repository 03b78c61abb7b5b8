"""Single-query response-time benchmark."""

import logging
import time
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from bstlab.core.config import ModelConfig
from bstlab.features.embedding import EncodedBatch, as_batch
from bstlab.features.records import Example
from bstlab.models.params import ModelParams
from bstlab.models.predictors import get_forward
from bstlab.tensor import Mode

logger = logging.getLogger(__name__)

WARMUP_QUERIES = 10


@dataclass
class RtStats:
    """Per-query eval-mode forward latency in milliseconds."""

    mean_ms: float
    p95_ms: float
    samples: np.ndarray

    @property
    def count(self) -> int:
        return int(self.samples.size)


def bench_rt(
    params: ModelParams,
    config: ModelConfig,
    examples: Sequence[Example] | EncodedBatch,
    repetitions: int = 5,
    warmup: int = WARMUP_QUERIES,
) -> RtStats:
    """
    Time one eval-mode forward per example, ``repetitions`` times over ``examples``.

    Examples are encoded up front; a warm-up pass runs before timing starts.
    """
    fn = get_forward(config.kind)
    batch = as_batch(examples, config.schema)
    queries = [batch.take(slice(i, i + 1)) for i in range(batch.size)]
    if not queries:
        return RtStats(mean_ms=0.0, p95_ms=0.0, samples=np.zeros(0))

    for query in queries[: max(warmup, 1)]:
        fn(query, params, config, Mode.EVAL, None)
    logger.debug(f"Warm-up done for {config.label} ({min(max(warmup, 1), len(queries))} queries)")

    samples = np.empty(repetitions * len(queries))
    i = 0
    for _ in range(repetitions):
        for query in queries:
            start = time.perf_counter_ns()
            fn(query, params, config, Mode.EVAL, None)
            samples[i] = (time.perf_counter_ns() - start) / 1e6
            i += 1

    stats = RtStats(
        mean_ms=float(samples.mean()),
        p95_ms=float(np.percentile(samples, 95)),
        samples=samples,
    )
    logger.info(f"{config.label}: RT mean {stats.mean_ms:.3f} ms, p95 {stats.p95_ms:.3f} ms")
    return stats
