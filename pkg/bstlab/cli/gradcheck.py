"""bstlab gradcheck command."""

import typer
from rich.console import Console
from rich.table import Table

from bstlab.core.config import ModelKind
from bstlab.core.errors import BstLabError

console = Console()


def gradcheck_command(
    model: ModelKind | None = typer.Option(
        None,
        "--model",
        "-m",
        help="Model kind to check (all kinds when omitted)",
    ),
    blocks: int = typer.Option(
        1,
        "--blocks",
        "-b",
        min=1,
        help="Stacked Transformer blocks (BST only)",
    ),
    seed: int = typer.Option(
        0,
        "--seed",
        "-s",
        help="Parameter and example seed",
    ),
    step: float = typer.Option(1e-5, "--step", help="Finite-difference step"),
    tol: float = typer.Option(1e-4, "--tol", help="Maximum allowed relative error"),
) -> None:
    """
    Compare analytic gradients with central finite differences.

    Uses a tiny model (d_model=8, h=2, n=5, MLP 16-8-4) in eval mode.

    Examples:

        bstlab gradcheck
        bstlab gradcheck --model bst --blocks 2
    """
    from bstlab.models.gradients import check_model_gradients, toy_model_config

    kinds = [model] if model is not None else list(ModelKind)
    table = Table(title="Gradient check", show_header=True)
    table.add_column("Model", style="cyan")
    table.add_column("Max rel. error", justify="right")
    table.add_column("Worst parameter")
    table.add_column("Status")

    failed = False
    try:
        for kind in kinds:
            report = check_model_gradients(kind, seed=seed, step=step, tol=tol, blocks=blocks)
            worst = report.worst
            label = toy_model_config(kind, blocks=blocks).label
            status = "[green]pass[/]" if report.passed else "[red]FAIL[/]"
            failed = failed or not report.passed
            table.add_row(
                label,
                f"{report.max_rel_error:.2e}",
                worst.name if worst else "-",
                status,
            )
    except BstLabError as e:
        console.print(f"[red]Error:[/] {e}")
        raise typer.Exit(1)

    console.print(table)
    if failed:
        raise typer.Exit(1)
