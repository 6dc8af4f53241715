import logging
from contextlib import contextmanager
from typing import Any, Dict, Iterable, Optional

import typer
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from config import LOG_LEVEL
from surrogate.exceptions import SurrogateError

rich_console = Console()
err_console = Console(stderr=True)

FLAGS: Dict[str, tuple] = {
    "estimator": ("--estimator", "-e"),
    "method": ("--method", "-m"),
    "weights": ("--weights", "-w"),
    "kernel": ("--kernel", "-k"),
    "boot": ("--boot", "-b"),
    "seed": ("--seed",),
    "threads": ("--threads", "-t"),
    "output_file": ("--output", "-o"),
    "csv": ("--csv",),
    "verbose": ("--verbose", "-v"),
    "setting": ("--setting", "-s"),
    "reps": ("--reps", "-r"),
    "out": ("--out",),
}


def setup_logging(verbose: bool = False):
    level = logging.DEBUG if verbose else getattr(logging, LOG_LEVEL, logging.INFO)
    logger = logging.getLogger("surrogate")
    logger.handlers = [RichHandler(console=err_console, show_path=False, rich_tracebacks=False)]
    logger.setLevel(level)
    logger.propagate = False


def success(text: str, auto_exit: bool = True):
    typer.echo(typer.style(text, fg=typer.colors.GREEN))
    if auto_exit:
        raise typer.Exit(0)


def warning(text: str):
    typer.echo(typer.style(text, fg=typer.colors.YELLOW), err=True)


def error(text: str, auto_exit: bool = True, code: int = 1):
    typer.echo(typer.style(text, fg=typer.colors.RED), err=True)
    if auto_exit:
        raise typer.Exit(code)


@contextmanager
def handle_errors():
    """Turns library errors into a red message and the error's exit code."""
    try:
        yield
    except SurrogateError as exc:
        error(f"{type(exc).__name__}: {exc.details}", code=exc.exit_code)


def fmt(value: Optional[float], digits: int = 3) -> str:
    if value is None:
        return "-"
    return f"{value:.{digits}f}"


def print_table(
    table: Table,
    rows: Iterable[Iterable[Any]],
    console: Optional[Console] = None
):
    for row in rows:
        table.add_row(*row)

    (console or rich_console).print(table)
