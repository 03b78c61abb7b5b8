"""bstlab command line: global flags, logging and command registration."""

import logging

import numpy as np
import typer
from rich.console import Console
from rich.logging import RichHandler

from bstlab import __version__

app = typer.Typer(
    name="bstlab",
    help="Behavior Sequence Transformer CTR experiments at desk scale.",
    add_completion=True,
    rich_markup_mode="rich",
    no_args_is_help=True,
)

console = Console()


def version_callback(value: bool) -> None:
    if value:
        console.print(f"[bold cyan]bstlab[/] {__version__} [dim](numpy {np.__version__})[/]")
        raise typer.Exit()


def setup_logging(verbose: bool, quiet: bool) -> None:
    """Route library logs through rich; -V shows per-batch detail, -q only warnings."""
    if verbose:
        level = logging.DEBUG
    elif quiet:
        level = logging.WARNING
    else:
        level = logging.INFO
    logging.basicConfig(
        level=level,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=console, rich_tracebacks=True, show_path=verbose)],
        force=True,
    )


@app.callback()
def main(
    version: bool | None = typer.Option(
        None,
        "--version",
        "-v",
        help="Show version and exit.",
        callback=version_callback,
        is_eager=True,
    ),
    verbose: bool = typer.Option(False, "--verbose", "-V", help="Debug logging."),
    quiet: bool = typer.Option(False, "--quiet", "-q", help="Only log warnings and errors."),
) -> None:
    """
    Generate click logs, train BST and the WDL family, and compare AUC and latency.

    [dim]Typical session:[/]

      [green]bstlab gen --out data[/]
      [green]bstlab train --model bst --blocks 1 --out runs/bst[/]
      [green]bstlab eval --out runs/bst --bench[/]
      [green]bstlab compare --seeds 5 --assert-order[/]
      [green]bstlab gradcheck[/]
    """
    setup_logging(verbose, quiet)


from bstlab.cli.compare import compare_command
from bstlab.cli.eval import eval_command
from bstlab.cli.gen import gen_command
from bstlab.cli.gradcheck import gradcheck_command
from bstlab.cli.train import train_command

for name, command in {
    "gen": gen_command,
    "train": train_command,
    "eval": eval_command,
    "compare": compare_command,
    "gradcheck": gradcheck_command,
}.items():
    app.command(name=name)(command)


if __name__ == "__main__":
    app()
