"""bstlab gen command - synthetic dataset generation."""

from dataclasses import asdict
from pathlib import Path

import typer
from rich.console import Console
from rich.table import Table

from bstlab.core.app import ExperimentContext
from bstlab.core.errors import BstLabError
from bstlab.core.paths import ensure_dir, get_dataset_paths

console = Console()


def gen_command(
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
    out: Path | None = typer.Option(
        None,
        "--out",
        "-o",
        help="Dataset directory (defaults to paths.data_dir)",
    ),
) -> None:
    """
    Generate train.jsonl / test.jsonl with a planted sequence signal.

    Examples:

        bstlab gen --out data
        bstlab gen --config run.yml --seed 7
    """
    from bstlab.data.jsonl import write_jsonl
    from bstlab.data.synth import synthesize

    try:
        ctx = ExperimentContext.create(config, command="gen", seed=seed, data_dir=out)
        data_dir = ensure_dir(ctx.data_dir)
        dataset = synthesize(ctx.config.gen_config())

        train_path, test_path = get_dataset_paths(data_dir)
        write_jsonl(dataset.train, train_path)
        write_jsonl(dataset.test, test_path)
        ctx.write_manifest(data_dir, extra={"stats": asdict(dataset.stats)})
    except BstLabError as e:
        console.print(f"[red]Error:[/] {e}")
        raise typer.Exit(1)
    except OSError as e:
        console.print(f"[red]Error:[/] {e}")
        raise typer.Exit(1)

    stats = dataset.stats
    table = Table(title="Synthetic dataset", show_header=True)
    table.add_column("Split", style="cyan")
    table.add_column("Examples", justify="right")
    table.add_column("Users", justify="right")
    table.add_column("Positive rate", justify="right")
    table.add_row("train", str(stats.n_train), str(stats.n_train_users), f"{stats.train_positive_rate:.3f}")
    table.add_row("test", str(stats.n_test), str(stats.n_test_users), f"{stats.test_positive_rate:.3f}")
    console.print(table)
    console.print(
        f"[dim]Expected positive rate {stats.expected_positive_rate:.3f}, "
        f"in-pattern targets {stats.in_pattern_share:.1%}[/]"
    )
    console.print(f"[green]✓[/] Wrote {train_path} and {test_path}")
