"""bstlab eval command."""

from pathlib import Path

import typer
from rich.console import Console
from rich.table import Table

from bstlab.core.app import ExperimentContext
from bstlab.core.config import ModelKind
from bstlab.core.errors import BstLabError
from bstlab.core.paths import CHECKPOINT_FILENAME, METRICS_FILENAME, ensure_dir

console = Console()


def eval_command(
    checkpoint: Path | None = typer.Option(
        None,
        "--checkpoint",
        "-k",
        help=f"Checkpoint file (defaults to <out>/{CHECKPOINT_FILENAME})",
    ),
    config: Path | None = typer.Option(
        None,
        "--config",
        "-c",
        help="Run config YAML; when given, the checkpoint must match it",
    ),
    seed: int | None = typer.Option(
        None,
        "--seed",
        "-s",
        help="Override the global seed",
    ),
    model: ModelKind | None = typer.Option(
        None,
        "--model",
        "-m",
        help="Expected model kind (defaults to the checkpoint's)",
    ),
    blocks: int | None = typer.Option(
        None,
        "--blocks",
        "-b",
        min=1,
        help="Expected Transformer blocks (defaults to the checkpoint's)",
    ),
    data: Path | None = typer.Option(
        None,
        "--data",
        "-d",
        help="Dataset directory (defaults to paths.data_dir)",
    ),
    out: Path | None = typer.Option(
        None,
        "--out",
        "-o",
        help="Output directory for the metrics CSV",
    ),
    bench: bool = typer.Option(
        False,
        "--bench",
        help="Also measure single-query response time",
    ),
) -> None:
    """
    Score a checkpoint on the test split: AUC, log-loss and optionally RT.

    The model comes from the checkpoint. With --config, --model or --blocks the
    checkpoint must match that model, or the command fails.

    Examples:

        bstlab eval --out runs
        bstlab eval --checkpoint runs/model.ckpt.json --bench
        bstlab eval --config run.yml --model bst --blocks 2
    """
    from bstlab.train.checkpoint import load_checkpoint, read_checkpoint_config
    from bstlab.train.evaluate import evaluate, write_metrics_csv

    try:
        ctx = ExperimentContext.create(
            config, command="eval", seed=seed, out_dir=out, data_dir=data
        )
        out_dir = ensure_dir(ctx.out_dir)
        checkpoint_path = checkpoint or out_dir / CHECKPOINT_FILENAME
        expected = None
        if config is not None or model is not None or blocks is not None:
            stored = read_checkpoint_config(checkpoint_path)
            expected = ctx.config.build_model_config(
                kind=model or stored.kind,
                blocks=blocks or stored.block.blocks,
                seed=stored.seed,
            )
        params, model_config = load_checkpoint(checkpoint_path, expected)
        report = evaluate(
            params,
            model_config,
            ctx.test_data,
            bench=bench,
            bench_examples=ctx.config.compare.bench_examples,
            repetitions=ctx.config.compare.bench_repetitions,
        )
        metrics_path = write_metrics_csv([report], out_dir / METRICS_FILENAME)
        ctx.write_manifest(
            out_dir,
            extra={"checkpoint": str(checkpoint_path), "model": model_config.label},
        )
    except BstLabError as e:
        console.print(f"[red]Error:[/] {e}")
        raise typer.Exit(1)
    except OSError as e:
        console.print(f"[red]Error:[/] {e}")
        raise typer.Exit(1)

    table = Table(title="Offline evaluation", show_header=True)
    table.add_column("Model", style="cyan")
    table.add_column("AUC", justify="right")
    table.add_column("Log-loss", justify="right")
    table.add_column("RT mean (ms)", justify="right")
    table.add_column("RT p95 (ms)", justify="right")
    table.add_column("N", justify="right")
    table.add_row(*report.to_row())
    console.print(table)
    console.print(f"[green]✓[/] Metrics: {metrics_path}")
