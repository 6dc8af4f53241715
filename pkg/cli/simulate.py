from pathlib import Path
from typing import List, Optional

import typer
from rich.table import Table

from config import BOOTSTRAP_SEED, SIM_DESK_REPS, SIM_N, SIM_REPS
from surrogate.estimators.missingness import parse_formula
from surrogate.exceptions import ConfigError
from surrogate.models.simulation import StudyResult
from surrogate.simulation.settings import SETTINGS, get_setting
from surrogate.simulation.study import METHODS, run_study, weight_misspec_sweep, write_results

from . import utils


def validate_setting(value: int) -> int:
    if value not in SETTINGS:
        raise typer.BadParameter(f"setting must be one of {sorted(SETTINGS)}")
    return value


def _print_study(result: StudyResult):
    missing = result.missing_fraction
    utils.rich_console.print(
        f"Setting {result.setting}, n={result.n}, {result.reps} replicate(s), true R_S={result.truth_r_s:.3f}, "
        f"missing S {missing.min:.1%} / {missing.median:.1%} / {missing.max:.1%} (min / median / max)"
    )
    utils.print_table(
        table=Table("Method", "Bias", "% Bias", "ESE", "ASE", "CP-N", "CP-Q", "RE", "Failures"),
        rows=[
            (
                row.method,
                utils.fmt(row.bias),
                utils.fmt(row.pct_bias, 1),
                utils.fmt(row.ese),
                utils.fmt(row.ase),
                utils.fmt(row.cp_n),
                utils.fmt(row.cp_q),
                utils.fmt(row.re, 2),
                f"{row.failures}{' !' if row.flagged else ''}",
            )
            for row in result.rows
        ],
    )


def _save(result: StudyResult, out: Optional[Path]):
    if out:
        csv_path, json_path = write_results(result, out)
        utils.rich_console.print(f"Wrote {csv_path} and {json_path}")


def simulate(
    setting: int = typer.Option(..., *utils.FLAGS["setting"], callback=validate_setting, help="Setting 1-5"),
    reps: Optional[int] = typer.Option(None, *utils.FLAGS["reps"], min=1,
                                       help=f"Monte Carlo replicates [default: {SIM_REPS}]"),
    desk: bool = typer.Option(False, "--desk", help=f"Desk-scale preset, {SIM_DESK_REPS} replicates"),
    n: int = typer.Option(SIM_N, "--n", min=4, help="Patients per trial, split evenly between arms"),
    boot: int = typer.Option(0, *utils.FLAGS["boot"], min=0, help="Bootstrap replicates per method, 0 skips ASE/CP"),
    seed: int = typer.Option(BOOTSTRAP_SEED, *utils.FLAGS["seed"]),
    methods: Optional[List[str]] = typer.Option(
        None, "--methods",
        help=f"Comma separated subset of {', '.join(METHODS)}; gold rows for RE are added automatically"
    ),
    formula: Optional[str] = typer.Option(None, "--formula", help="Overrides the setting's IPW weight model"),
    out: Optional[Path] = typer.Option(None, *utils.FLAGS["out"], help="Output stem; writes .csv and .json"),
    threads: Optional[int] = typer.Option(None, *utils.FLAGS["threads"]),
    verbose: bool = typer.Option(False, *utils.FLAGS["verbose"]),
):
    """
    Runs the Monte Carlo bench on one of the simulation settings

    Reports bias, % bias, ESE, ASE, coverage of both interval styles and
    efficiency relative to the gold standard.
    """
    utils.setup_logging(verbose)
    with utils.handle_errors():
        spec = get_setting(setting, n=n)
        selected = [m.strip() for item in (methods or [",".join(METHODS)]) for m in item.split(",") if m.strip()]

        terms = None
        if formula is not None:
            terms = parse_formula(formula)
            if terms is None:
                raise ConfigError("the bench weight model must be a logistic formula")

        result = run_study(
            spec,
            methods=selected,
            reps=reps or (SIM_DESK_REPS if desk else SIM_REPS),
            boot_d=boot,
            seed=seed,
            threads=threads,
            formula=terms,
        )
        _print_study(result)
        _save(result, out)


def sweep(
    setting: int = typer.Option(3, *utils.FLAGS["setting"], callback=validate_setting, help="Setting 3 or 4"),
    reps: int = typer.Option(SIM_DESK_REPS, *utils.FLAGS["reps"], min=1),
    n: int = typer.Option(SIM_N, "--n", min=4),
    boot: int = typer.Option(0, *utils.FLAGS["boot"], min=0),
    seed: int = typer.Option(BOOTSTRAP_SEED, *utils.FLAGS["seed"]),
    out: Optional[Path] = typer.Option(None, *utils.FLAGS["out"]),
    threads: Optional[int] = typer.Option(None, *utils.FLAGS["threads"]),
    verbose: bool = typer.Option(False, *utils.FLAGS["verbose"]),
):
    """
    Compares complete case with five IPW weight models under Y-dependent missingness
    """
    utils.setup_logging(verbose)
    with utils.handle_errors():
        result = weight_misspec_sweep(get_setting(setting, n=n), reps=reps, seed=seed, boot_d=boot, threads=threads)
        _print_study(result)
        _save(result, out)
