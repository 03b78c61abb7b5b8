"""bstlab train command."""

from pathlib import Path

import typer
from rich.console import Console
from rich.table import Table

from bstlab.core.app import ExperimentContext
from bstlab.core.config import ModelKind
from bstlab.core.errors import BstLabError
from bstlab.core.paths import CHECKPOINT_FILENAME, LOSS_LOG_FILENAME, ensure_dir

console = Console()


def train_command(
    config: Path | None = typer.Option(
        None,
        "--config",
        "-c",
        help="Run config YAML (built-in defaults when omitted)",
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
        help="Model kind to train",
    ),
    blocks: int | None = typer.Option(
        None,
        "--blocks",
        "-b",
        min=1,
        help="Stacked Transformer blocks (BST only)",
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
        help="Output directory for checkpoint and loss log",
    ),
) -> None:
    """
    Train one model and write its checkpoint and per-epoch loss.

    Examples:

        bstlab train --model bst --blocks 1
        bstlab train --model wdl_seq --data data --out runs/wdl_seq
    """
    from bstlab.train.checkpoint import save_checkpoint
    from bstlab.train.evaluate import write_loss_log
    from bstlab.train.loop import train

    try:
        ctx = ExperimentContext.create(
            config,
            command="train",
            seed=seed,
            kind=model,
            blocks=blocks,
            out_dir=out,
            data_dir=data,
        )
        model_config = ctx.config.build_model_config()
        train_config = ctx.config.train_config()
        params, history = train(ctx.train_data, model_config, train_config)

        out_dir = ensure_dir(ctx.out_dir)
        checkpoint_path = save_checkpoint(params, model_config, out_dir / CHECKPOINT_FILENAME)
        loss_path = write_loss_log(history, out_dir / LOSS_LOG_FILENAME)
        ctx.write_manifest(out_dir, extra={"model": model_config.label, "final_loss": history[-1]})
    except BstLabError as e:
        console.print(f"[red]Error:[/] {e}")
        raise typer.Exit(1)
    except OSError as e:
        console.print(f"[red]Error:[/] {e}")
        raise typer.Exit(1)

    table = Table(title=f"Training {model_config.label}", show_header=True)
    table.add_column("Epoch", justify="right", style="cyan")
    table.add_column("Loss", justify="right")
    for epoch, loss in enumerate(history, start=1):
        table.add_row(str(epoch), f"{loss:.5f}")
    console.print(table)
    console.print(f"[green]✓[/] Checkpoint: {checkpoint_path}")
    console.print(f"[green]✓[/] Loss log: {loss_path}")
