from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional

import pandas as pd
import typer
from pydantic import BaseModel, TypeAdapter
from rich.table import Table

from config import BOOTSTRAP_REPLICATES, BOOTSTRAP_SEED, EM_MAX_ITER, EM_TOL
from surrogate.bootstrap import bootstrap_inference
from surrogate.data import load_trial_csv
from surrogate.estimators.missingness import parse_formula
from surrogate.models.bootstrap import ESTIMANDS, BootstrapResult
from surrogate.models.kernel import KernelKind
from surrogate.models.trial import EstimandSet, TrialData
from surrogate.pipeline import EstimatorKind, MethodKind, Pipeline

from . import utils

COMPARE_METHODS = (
    (EstimatorKind.nonparametric, MethodKind.cc),
    (EstimatorKind.nonparametric, MethodKind.ipw),
    (EstimatorKind.parametric, MethodKind.cc),
    (EstimatorKind.parametric, MethodKind.ipw),
    (EstimatorKind.parametric, MethodKind.smle),
)


class CIStyle(str, Enum):
    wald = "wald"
    quantile = "quantile"
    both = "both"


class EvaluateConfig(BaseModel):
    input: str
    estimator: EstimatorKind = EstimatorKind.parametric
    method: MethodKind = MethodKind.cc
    weights: Optional[str] = None
    kernel: KernelKind = KernelKind.epanechnikov
    bandwidth: Optional[float] = None
    cap: Optional[float] = None
    boot: int = BOOTSTRAP_REPLICATES
    seed: int = BOOTSTRAP_SEED
    ci: CIStyle = CIStyle.both
    tol: float = EM_TOL
    max_iter: int = EM_MAX_ITER

    def pipeline(self) -> Pipeline:
        return Pipeline.build(
            self.estimator,
            self.method,
            weights=self.weights,
            kernel=self.kernel,
            bandwidth=self.bandwidth,
            cap=self.cap,
            tol=self.tol,
            max_iter=self.max_iter,
        )

    def canonical(self) -> "EvaluateConfig":
        """Normalises the weight formula so equal models echo equal text."""
        if self.method != MethodKind.ipw:
            return self.model_copy(update={"weights": None})
        terms = parse_formula(self.weights)
        return self.model_copy(update={"weights": "empirical" if terms is None else ",".join(t.value for t in terms)})


class Report(BaseModel):
    config: EvaluateConfig
    label: str
    estimands: EstimandSet
    bootstrap: Optional[BootstrapResult] = None
    overlap: Optional[Dict[str, Any]] = None
    diagnostics: Dict[str, Any]


def build_report(data: TrialData, config: EvaluateConfig, threads: Optional[int] = None,
                 key: tuple = ()) -> Report:
    config = config.canonical()
    pipeline = config.pipeline()
    outcome = pipeline.run(data)

    diagnostics = dict(outcome.diagnostics)
    overlap = diagnostics.pop("overlap", None)

    bootstrap = None
    if config.boot > 0:
        bootstrap = bootstrap_inference(data, pipeline, d=config.boot, seed=config.seed, threads=threads, key=key)

    return Report(
        config=config,
        label=pipeline.label,
        estimands=outcome.estimands,
        bootstrap=bootstrap,
        overlap=overlap,
        diagnostics=diagnostics,
    )


def summary_frame(report: Report) -> pd.DataFrame:
    rows = []
    for name in ESTIMANDS:
        row = {"method": report.label, "estimand": name, "estimate": getattr(report.estimands, name)}
        if report.bootstrap is not None:
            row["se"] = getattr(report.bootstrap.se, name)
            row["wald_lo"] = report.bootstrap.ci_wald[name].lo
            row["wald_hi"] = report.bootstrap.ci_wald[name].hi
            row["quantile_lo"] = report.bootstrap.ci_quantile[name].lo
            row["quantile_hi"] = report.bootstrap.ci_quantile[name].hi
        rows.append(row)
    return pd.DataFrame(rows)


def _warn_overlap(report: Report):
    if report.overlap is not None and not report.overlap["ok"]:
        utils.warning(
            f"{report.label}: {report.overlap['n_outside']} control surrogate(s) fall outside the treated "
            f"range, {report.diagnostics['n_extrapolated']} extrapolated by nearest neighbour; "
            "expect boundary bias"
        )


def _print_report(report: Report, ci: CIStyle):
    columns = ["Estimand", "Estimate"]
    if report.bootstrap is not None:
        columns.append("SE")
        if ci in (CIStyle.wald, CIStyle.both):
            columns.append("95% CI (Wald)")
        if ci in (CIStyle.quantile, CIStyle.both):
            columns.append("95% CI (quantile)")

    rows = []
    for name in ESTIMANDS:
        row = [name, utils.fmt(getattr(report.estimands, name), 4)]
        if report.bootstrap is not None:
            row.append(utils.fmt(getattr(report.bootstrap.se, name), 4))
            if ci in (CIStyle.wald, CIStyle.both):
                interval = report.bootstrap.ci_wald[name]
                row.append(f"({interval.lo:.4f}, {interval.hi:.4f})")
            if ci in (CIStyle.quantile, CIStyle.both):
                interval = report.bootstrap.ci_quantile[name]
                row.append(f"({interval.lo:.4f}, {interval.hi:.4f})")
        rows.append(row)

    utils.print_table(table=Table(*columns, title=report.label), rows=rows)
    if report.bootstrap is not None and report.bootstrap.failures:
        utils.warning(f"{report.bootstrap.failures}/{report.bootstrap.d_requested} bootstrap replicate(s) "
                      f"excluded: {report.bootstrap.failure_reasons}")


def evaluate(
    input_file: Path = typer.Argument(..., exists=True, dir_okay=False, help="CSV with columns y, s, z"),
    estimator: EstimatorKind = typer.Option(EstimatorKind.parametric, *utils.FLAGS["estimator"]),
    method: MethodKind = typer.Option(MethodKind.cc, *utils.FLAGS["method"]),
    weights: Optional[str] = typer.Option(
        None, *utils.FLAGS["weights"],
        help='Missingness model terms from {z, y, y:z}, comma separated, or "empirical"'
    ),
    cap: Optional[float] = typer.Option(None, "--cap", help="Truncate inverse-probability weights at this value"),
    kernel: KernelKind = typer.Option(KernelKind.epanechnikov, *utils.FLAGS["kernel"]),
    bandwidth: Optional[float] = typer.Option(None, "--bandwidth", help="Overrides the rule-of-thumb bandwidth"),
    boot: int = typer.Option(BOOTSTRAP_REPLICATES, *utils.FLAGS["boot"], min=0, help="Bootstrap replicates, 0 skips"),
    seed: int = typer.Option(BOOTSTRAP_SEED, *utils.FLAGS["seed"]),
    ci: CIStyle = typer.Option(CIStyle.both, "--ci"),
    tol: float = typer.Option(EM_TOL, "--tol", help="EM convergence tolerance"),
    max_iter: int = typer.Option(EM_MAX_ITER, "--max-iter", help="EM iteration limit"),
    threads: Optional[int] = typer.Option(None, *utils.FLAGS["threads"]),
    output_file: Optional[Path] = typer.Option(None, *utils.FLAGS["output_file"], help="Write the JSON report here"),
    csv_file: Optional[Path] = typer.Option(None, *utils.FLAGS["csv"], help="Write a CSV summary here"),
    verbose: bool = typer.Option(False, *utils.FLAGS["verbose"]),
):
    """
    Estimates the proportion of treatment effect explained by the surrogate

    Prints a summary table; the full report goes to `--output` as JSON.
    """
    utils.setup_logging(verbose)
    with utils.handle_errors():
        config = EvaluateConfig(
            input=str(input_file), estimator=estimator, method=method, weights=weights, kernel=kernel,
            bandwidth=bandwidth, cap=cap, boot=boot, seed=seed, ci=ci, tol=tol, max_iter=max_iter,
        )
        data = load_trial_csv(input_file)
        report = build_report(data, config, threads=threads)

        _print_report(report, ci)
        _warn_overlap(report)

        if output_file:
            output_file.write_text(report.model_dump_json(indent=2))
        if csv_file:
            summary_frame(report).to_csv(csv_file, index=False)


def compare(
    input_file: Path = typer.Argument(..., exists=True, dir_okay=False, help="CSV with columns y, s, z"),
    weights: Optional[str] = typer.Option(None, *utils.FLAGS["weights"], help="Missingness model for the IPW rows"),
    boot: int = typer.Option(BOOTSTRAP_REPLICATES, *utils.FLAGS["boot"], min=0),
    seed: int = typer.Option(BOOTSTRAP_SEED, *utils.FLAGS["seed"]),
    threads: Optional[int] = typer.Option(None, *utils.FLAGS["threads"]),
    output_file: Optional[Path] = typer.Option(None, *utils.FLAGS["output_file"], help="Write the JSON reports here"),
    verbose: bool = typer.Option(False, *utils.FLAGS["verbose"]),
):
    """
    Runs every missing-data method on one dataset

    Shows R_S with its quantile 95% CI and the CI width per method.
    """
    utils.setup_logging(verbose)
    with utils.handle_errors():
        data = load_trial_csv(input_file)
        reports: List[Report] = []
        for index, (estimator, method) in enumerate(COMPARE_METHODS):
            config = EvaluateConfig(
                input=str(input_file), estimator=estimator, method=method, weights=weights, boot=boot, seed=seed,
            )
            reports.append(build_report(data, config, threads=threads, key=(index,)))

        rows = []
        for report in reports:
            if report.bootstrap is not None:
                interval = report.bootstrap.ci_quantile["r_s"]
                rows.append((report.label, utils.fmt(report.estimands.r_s),
                             f"({interval.lo:.3f}, {interval.hi:.3f})", utils.fmt(interval.width)))
            else:
                rows.append((report.label, utils.fmt(report.estimands.r_s), "-", "-"))
        utils.print_table(table=Table("Method", "R_S", "95% CI (quantile)", "CI width"), rows=rows)
        for report in reports:
            _warn_overlap(report)

        if output_file:
            output_file.write_bytes(TypeAdapter(List[Report]).dump_json(reports, indent=2))
