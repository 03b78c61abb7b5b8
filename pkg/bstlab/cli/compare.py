"""bstlab compare command - the multi-model, multi-seed results table."""

import logging
from pathlib import Path

import typer
from rich.console import Console
from rich.table import Table

from bstlab.core.app import ExperimentContext
from bstlab.core.errors import BstLabError
from bstlab.core.paths import COMPARE_RUNS_FILENAME, COMPARE_SUMMARY_FILENAME, ensure_dir

console = Console()
logger = logging.getLogger(__name__)


def _ms(value: float | None) -> str:
    return "-" if value is None else f"{value:.3f}"


def compare_command(
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
        help="First seed; runs use seed, seed+1, ...",
    ),
    seeds: int | None = typer.Option(
        None,
        "--seeds",
        "-k",
        min=1,
        help="Number of seeds (defaults to compare.seeds)",
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
        help="Output directory for the comparison CSVs",
    ),
    bench: bool = typer.Option(
        True,
        "--bench/--no-bench",
        help="Measure response time for every model",
    ),
    assert_order: bool = typer.Option(
        False,
        "--assert-order",
        help="Exit non-zero unless AUC(WDL) < AUC(WDL(+Seq)) < AUC(BST(b=1)) by the margin",
    ),
) -> None:
    """
    Train WDL, WDL(+Seq), DIN-lite and BST(b=1..3) over several seeds.

    Writes one row per (model, seed) and a seed-averaged summary.

    Examples:

        bstlab compare --seeds 5 --assert-order
        bstlab compare --no-bench --seeds 1
    """
    from bstlab.train.compare import (
        check_ordering,
        run_comparison,
        summarize,
        write_runs_csv,
        write_summary_csv,
    )

    try:
        ctx = ExperimentContext.create(
            config, command="compare", seed=seed, out_dir=out, data_dir=data
        )
        out_dir = ensure_dir(ctx.out_dir)

        def progress(run) -> None:
            console.print(
                f"  [cyan]{run.model:<10}[/] seed {run.seed}: AUC {run.auc:.4f}  "
                f"RT {_ms(run.rt_mean_ms)} ms"
            )

        runs = run_comparison(
            ctx.config,
            ctx.train_data,
            ctx.test_data,
            seeds=seeds,
            bench=bench,
            on_run=progress,
        )
        summary = summarize(runs)
        runs_path = write_runs_csv(runs, out_dir / COMPARE_RUNS_FILENAME)
        summary_path = write_summary_csv(summary, out_dir / COMPARE_SUMMARY_FILENAME)
        ctx.write_manifest(out_dir, extra={"seeds": seeds or ctx.config.compare.seeds})
    except BstLabError as e:
        console.print(f"[red]Error:[/] {e}")
        raise typer.Exit(1)
    except OSError as e:
        console.print(f"[red]Error:[/] {e}")
        raise typer.Exit(1)

    table = Table(title="Model comparison (seed-averaged)", show_header=True)
    table.add_column("Model", style="cyan")
    table.add_column("Offline AUC", justify="right")
    table.add_column("± std", justify="right")
    table.add_column("Log-loss", justify="right")
    table.add_column("Average RT (ms)", justify="right")
    table.add_column("RT p95 (ms)", justify="right")
    best = max(summary, key=lambda s: s.auc_mean)
    for s in summary:
        style = "bold green" if s is best else None
        table.add_row(
            s.model,
            f"{s.auc_mean:.4f}",
            f"{s.auc_std:.4f}",
            f"{s.logloss_mean:.4f}",
            _ms(s.rt_mean_ms),
            _ms(s.rt_p95_ms),
            style=style,
        )
    console.print(table)
    console.print(f"[green]✓[/] Runs: {runs_path}")
    console.print(f"[green]✓[/] Summary: {summary_path}")

    if assert_order:
        problems = check_ordering(summary, ctx.config.compare.min_margin)
        if problems:
            for problem in problems:
                logger.warning(problem)
                console.print(f"[red]✗[/] {problem}")
            raise typer.Exit(1)
        console.print("[green]✓[/] AUC ordering WDL < WDL(+Seq) < BST(b=1) holds")
