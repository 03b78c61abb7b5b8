"""Offline evaluation reports and their CSV form."""

import csv
import logging
from collections.abc import Iterable, Sequence
from pathlib import Path

import numpy as np
from pydantic import BaseModel, Field

from bstlab.core.config import ModelConfig
from bstlab.core.errors import DataFormatError
from bstlab.features.embedding import OovTally, as_batch
from bstlab.features.records import Example
from bstlab.models.params import ModelParams
from bstlab.models.predictors import predict
from bstlab.train.bench import bench_rt
from bstlab.train.metrics import auc, logloss

logger = logging.getLogger(__name__)

METRICS_HEADER = ["model", "auc", "logloss", "rt_mean_ms", "rt_p95_ms", "n"]
LOSS_HEADER = ["epoch", "loss"]


class EvalReport(BaseModel):
    """Offline AUC / log-loss and, when benchmarked, response time."""

    model: str = Field(..., description="Display label, e.g. BST(b=1)")
    auc: float = Field(..., ge=0.0, le=1.0)
    logloss: float = Field(..., ge=0.0)
    rt_mean_ms: float | None = None
    rt_p95_ms: float | None = None
    n_examples: int = Field(..., ge=0)

    def to_row(self) -> list[str]:
        return [
            self.model,
            f"{self.auc:.6f}",
            f"{self.logloss:.6f}",
            "" if self.rt_mean_ms is None else f"{self.rt_mean_ms:.4f}",
            "" if self.rt_p95_ms is None else f"{self.rt_p95_ms:.4f}",
            str(self.n_examples),
        ]


def evaluate(
    params: ModelParams,
    config: ModelConfig,
    test: Sequence[Example],
    bench: bool = False,
    bench_examples: int = 200,
    repetitions: int = 5,
) -> EvalReport:
    """Score every test example in eval mode; RT fields are filled only when ``bench``."""
    tally = OovTally()
    batch = as_batch(test, config.schema, tally)
    if tally.total:
        logger.warning(f"Out-of-vocabulary ids mapped to row 0: {dict(tally.counts)}")
    scores = predict(batch, params, config)

    rt_mean = rt_p95 = None
    if bench:
        stats = bench_rt(params, config, batch.take(slice(0, bench_examples)), repetitions)
        rt_mean, rt_p95 = stats.mean_ms, stats.p95_ms

    report = EvalReport(
        model=config.label,
        auc=auc(scores, batch.labels.astype(np.int64)),
        logloss=logloss(scores, batch.labels.astype(np.int64)),
        rt_mean_ms=rt_mean,
        rt_p95_ms=rt_p95,
        n_examples=batch.size,
    )
    logger.info(f"{report.model}: AUC {report.auc:.4f}, logloss {report.logloss:.4f}")
    return report


def write_metrics_csv(reports: Iterable[EvalReport], path: str | Path) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with target.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(METRICS_HEADER)
        for report in reports:
            writer.writerow(report.to_row())
    return target


def _optional_float(value: str) -> float | None:
    return float(value) if value.strip() else None


def read_metrics_csv(path: str | Path) -> list[EvalReport]:
    """
    Parse a metrics CSV back into reports.

    Raises:
        DataFormatError: If the header or a row is malformed.
    """
    source = Path(path)
    with source.open(newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != METRICS_HEADER:
            raise DataFormatError(f"unexpected metrics header {header}", line_number=1)
        reports = []
        for line_number, row in enumerate(reader, start=2):
            try:
                model, auc_value, loss, rt_mean, rt_p95, n = row
                reports.append(
                    EvalReport(
                        model=model,
                        auc=float(auc_value),
                        logloss=float(loss),
                        rt_mean_ms=_optional_float(rt_mean),
                        rt_p95_ms=_optional_float(rt_p95),
                        n_examples=int(n),
                    )
                )
            except ValueError as e:
                raise DataFormatError(f"bad metrics row: {e}", line_number=line_number)
    return reports


def write_loss_log(history: Sequence[float], path: str | Path) -> Path:
    """Per-epoch mean training loss as ``epoch,loss`` rows."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with target.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(LOSS_HEADER)
        for epoch, loss in enumerate(history, start=1):
            writer.writerow([epoch, repr(float(loss))])
    return target
