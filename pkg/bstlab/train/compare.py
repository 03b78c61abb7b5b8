"""Multi-seed comparison of BST against the WDL-family baselines."""

import csv
import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from bstlab.core.config import ModelConfig, ModelKind, RunConfig
from bstlab.features.embedding import as_batch
from bstlab.features.records import Example
from bstlab.train.evaluate import evaluate
from bstlab.train.loop import train

logger = logging.getLogger(__name__)

RUNS_HEADER = ["model", "seed", "auc", "logloss", "rt_mean_ms", "rt_p95_ms", "n"]
SUMMARY_HEADER = ["model", "auc_mean", "auc_std", "logloss_mean", "rt_mean_ms", "rt_p95_ms", "seeds"]

# (kind, blocks) in results-table order
LINEUP: list[tuple[ModelKind, int]] = [
    (ModelKind.WDL, 1),
    (ModelKind.WDL_SEQ, 1),
    (ModelKind.DIN_LITE, 1),
    (ModelKind.BST, 1),
    (ModelKind.BST, 2),
    (ModelKind.BST, 3),
]


@dataclass
class CompareRun:
    """One trained and evaluated (model, seed) pair."""

    model: str
    seed: int
    auc: float
    logloss: float
    rt_mean_ms: float | None
    rt_p95_ms: float | None
    n: int


@dataclass
class CompareSummary:
    """Seed-averaged results for one model."""

    model: str
    auc_mean: float
    auc_std: float
    logloss_mean: float
    rt_mean_ms: float | None
    rt_p95_ms: float | None
    seeds: int


ProgressCallback = Callable[[CompareRun], None]


def lineup_configs(run: RunConfig, seed: int) -> list[ModelConfig]:
    return [run.build_model_config(kind=kind, blocks=blocks, seed=seed) for kind, blocks in LINEUP]


def run_comparison(
    run: RunConfig,
    train_data: Sequence[Example],
    test_data: Sequence[Example],
    seeds: int | None = None,
    bench: bool = True,
    on_run: ProgressCallback | None = None,
) -> list[CompareRun]:
    """
    Train and evaluate every lineup model for seeds ``run.seed .. run.seed + k - 1``.

    Models run one after another so timing phases never overlap.
    """
    count = seeds if seeds is not None else run.compare.seeds
    schema = run.schema
    train_batch = as_batch(train_data, schema)
    test_batch = as_batch(test_data, schema)
    results: list[CompareRun] = []

    for offset in range(count):
        seed = run.seed + offset
        train_config = run.train_config().model_copy(update={"seed": seed})
        for config in lineup_configs(run, seed):
            logger.info(f"[seed {seed}] training {config.label}")
            params, _ = train(train_batch, config, train_config)
            report = evaluate(
                params,
                config,
                test_batch,
                bench=bench,
                bench_examples=run.compare.bench_examples,
                repetitions=run.compare.bench_repetitions,
            )
            result = CompareRun(
                model=report.model,
                seed=seed,
                auc=report.auc,
                logloss=report.logloss,
                rt_mean_ms=report.rt_mean_ms,
                rt_p95_ms=report.rt_p95_ms,
                n=report.n_examples,
            )
            results.append(result)
            if on_run is not None:
                on_run(result)
    return results


def _mean_or_none(values: list[float | None]) -> float | None:
    present = [v for v in values if v is not None]
    return float(np.mean(present)) if present else None


def summarize(runs: Sequence[CompareRun]) -> list[CompareSummary]:
    """Seed-averaged rows in first-seen model order."""
    grouped: dict[str, list[CompareRun]] = {}
    for run in runs:
        grouped.setdefault(run.model, []).append(run)
    return [
        CompareSummary(
            model=model,
            auc_mean=float(np.mean([r.auc for r in rows])),
            auc_std=float(np.std([r.auc for r in rows])),
            logloss_mean=float(np.mean([r.logloss for r in rows])),
            rt_mean_ms=_mean_or_none([r.rt_mean_ms for r in rows]),
            rt_p95_ms=_mean_or_none([r.rt_p95_ms for r in rows]),
            seeds=len(rows),
        )
        for model, rows in grouped.items()
    ]


def check_ordering(summary: Sequence[CompareSummary], margin: float) -> list[str]:
    """
    Violations of AUC(WDL) + margin <= AUC(WDL(+Seq)) and AUC(WDL(+Seq)) + margin <= AUC(BST(b=1)).

    Returns:
        One message per violated or unmeasured comparison; empty when the order holds.
    """
    by_model = {row.model: row.auc_mean for row in summary}
    chain = ["WDL", "WDL(+Seq)", "BST(b=1)"]
    problems = [f"{name} missing from the comparison" for name in chain if name not in by_model]
    if problems:
        return problems
    for lower, upper in zip(chain[:-1], chain[1:], strict=True):
        if by_model[upper] < by_model[lower] + margin:
            problems.append(
                f"AUC {upper}={by_model[upper]:.4f} is not {margin} above {lower}={by_model[lower]:.4f}"
            )
    return problems


def _fmt(value: float | None, digits: int) -> str:
    return "" if value is None else f"{value:.{digits}f}"


def write_runs_csv(runs: Sequence[CompareRun], path: str | Path) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with target.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(RUNS_HEADER)
        for r in runs:
            writer.writerow(
                [
                    r.model,
                    r.seed,
                    f"{r.auc:.6f}",
                    f"{r.logloss:.6f}",
                    _fmt(r.rt_mean_ms, 4),
                    _fmt(r.rt_p95_ms, 4),
                    r.n,
                ]
            )
    return target


def write_summary_csv(summary: Sequence[CompareSummary], path: str | Path) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with target.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(SUMMARY_HEADER)
        for s in summary:
            writer.writerow(
                [
                    s.model,
                    f"{s.auc_mean:.6f}",
                    f"{s.auc_std:.6f}",
                    f"{s.logloss_mean:.6f}",
                    _fmt(s.rt_mean_ms, 4),
                    _fmt(s.rt_p95_ms, 4),
                    s.seeds,
                ]
            )
    return target
