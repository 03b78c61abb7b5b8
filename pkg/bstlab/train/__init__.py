"""Training, evaluation, benchmarking and checkpoints."""

from bstlab.train.bench import RtStats, bench_rt
from bstlab.train.checkpoint import CHECKPOINT_VERSION, load_checkpoint, save_checkpoint
from bstlab.train.evaluate import (
    EvalReport,
    evaluate,
    read_metrics_csv,
    write_loss_log,
    write_metrics_csv,
)
from bstlab.train.loop import train
from bstlab.train.metrics import auc, logloss
from bstlab.train.optim import AdamState, adam_step

__all__ = [
    "AdamState",
    "CHECKPOINT_VERSION",
    "EvalReport",
    "RtStats",
    "adam_step",
    "auc",
    "bench_rt",
    "evaluate",
    "load_checkpoint",
    "logloss",
    "read_metrics_csv",
    "save_checkpoint",
    "train",
    "write_loss_log",
    "write_metrics_csv",
]
