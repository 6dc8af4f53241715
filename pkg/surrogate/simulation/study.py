"""
Monte Carlo bench: repeated generation, estimation and bootstrap, summarised
as bias, relative bias, empirical and average standard errors, coverage of
both interval styles and efficiency relative to the gold standard.
"""
import json
import logging
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from config import BOOTSTRAP_SEED
from surrogate.bootstrap import bootstrap_inference
from surrogate.exceptions import EstimationError, InferenceUnreliableError, ValidationError
from surrogate.models.simulation import MetricsRow, MissingSummary, StudyResult
from surrogate.models.weights import Term
from surrogate.pipeline import EstimatorKind, MethodKind, Pipeline
from surrogate.simulation.generate import generate_trial, true_estimands
from surrogate.simulation.settings import SWEEP_VERSIONS, SettingSpec
from surrogate.utils.concurrency import run_parallel

logger = logging.getLogger(__name__)

METHODS = ("gold-nonpar", "cc-nonpar", "ipw-nonpar", "gold-par", "cc-par", "ipw-par", "smle")
GOLD_FOR = {
    "gold-nonpar": "gold-nonpar", "cc-nonpar": "gold-nonpar", "ipw-nonpar": "gold-nonpar",
    "gold-par": "gold-par", "cc-par": "gold-par", "ipw-par": "gold-par", "smle": "gold-par",
}
FAILURE_FLAG = 0.1


@dataclass(frozen=True)
class MethodPlan:
    label: str
    pipeline: Pipeline
    gold: bool
    code: int
    version: Optional[str] = None

    @property
    def reference(self) -> str:
        return "gold-par" if self.pipeline.estimator == EstimatorKind.parametric else "gold-nonpar"


def _formula_text(formula: Tuple[Term, ...]) -> str:
    return ",".join(term.value for term in formula)


def plan_methods(methods: Iterable[str], spec: SettingSpec, formula: Optional[Tuple[Term, ...]] = None,
                 **pipeline_kwargs) -> List[MethodPlan]:
    """Resolves method labels to pipelines, adding the gold rows RE is computed against."""
    requested = list(dict.fromkeys(methods))
    unknown = [m for m in requested if m not in METHODS]
    if unknown:
        raise ValidationError(f"unknown method(s) {unknown}, expected any of {list(METHODS)}")

    wanted = set(requested) | {GOLD_FOR[m] for m in requested}
    formula = spec.ipw_formula if formula is None else formula

    plans = []
    for code, label in enumerate(METHODS):
        if label not in wanted:
            continue
        estimator = EstimatorKind.nonparametric if label.endswith("nonpar") else EstimatorKind.parametric
        if label == "smle":
            method = MethodKind.smle
        elif label.startswith("ipw"):
            method = MethodKind.ipw
        else:
            method = MethodKind.cc
        plans.append(MethodPlan(
            label=label,
            pipeline=Pipeline(estimator=estimator, method=method, formula=formula, **pipeline_kwargs),
            gold=label.startswith("gold"),
            code=code,
        ))
    return plans


def _run_replicate(spec: SettingSpec, plans: Sequence[MethodPlan], boot_d: int, seed: int, replicate: int):
    trial = generate_trial(spec, seed=seed, replicate=replicate)
    truth = trial.truth.r_s
    outcome: Dict[str, Union[str, Tuple[float, float, bool, bool]]] = {}

    for plan in plans:
        data = trial.full if plan.gold else trial.masked
        try:
            if boot_d > 0:
                result = bootstrap_inference(
                    data, plan.pipeline, d=boot_d, seed=seed, threads=1, key=(replicate, plan.code),
                )
                outcome[plan.label] = (
                    result.point.r_s,
                    result.se.r_s,
                    result.covers(truth, "r_s", "wald"),
                    result.covers(truth, "r_s", "quantile"),
                )
            else:
                outcome[plan.label] = (plan.pipeline(data).r_s, np.nan, False, False)
        except (EstimationError, ValidationError, InferenceUnreliableError) as exc:
            outcome[plan.label] = type(exc).__name__

    logger.debug(f"Replicate {replicate} done ({trial.missing_fraction:.1%} missing)")
    return trial.missing_fraction, outcome


def _metrics(plan: MethodPlan, values: List, truth: float, boot_d: int, reps: int,
             reference_var: Optional[float]) -> MetricsRow:
    successes = np.array([v for v in values if not isinstance(v, str)], dtype=float).reshape(-1, 4)
    reasons = Counter(v for v in values if isinstance(v, str))
    failures = sum(reasons.values())
    row = MetricsRow(
        method=plan.label,
        version=plan.version,
        formula=_formula_text(plan.pipeline.formula) if plan.pipeline.method == MethodKind.ipw else None,
        n_success=int(successes.shape[0]),
        failures=failures,
        failure_reasons=dict(sorted(reasons.items())),
        flagged=failures > FAILURE_FLAG * reps,
    )
    if row.flagged:
        logger.warning(f"{plan.label}: {failures}/{reps} replicate(s) failed {dict(reasons)}")
    if successes.shape[0] < 2:
        return row

    estimates = successes[:, 0]
    bias = float(np.mean(estimates - truth))
    variance = float(np.var(estimates, ddof=1))
    row.bias = bias
    row.pct_bias = 100.0 * bias / truth
    row.ese = float(np.sqrt(variance))
    if boot_d > 0:
        row.ase = float(np.mean(successes[:, 1]))
        row.cp_n = float(np.mean(successes[:, 2]))
        row.cp_q = float(np.mean(successes[:, 3]))
    if reference_var is not None and variance > 0:
        row.re = reference_var / variance
    return row


def _summarise(spec: SettingSpec, plans: Sequence[MethodPlan], replicates, boot_d: int, seed: int) -> StudyResult:
    reps = len(replicates)
    truth = true_estimands(spec).r_s
    fractions = np.array([fraction for fraction, _ in replicates]) if reps else np.array([np.nan])

    columns = {plan.label: [outcome[plan.label] for _, outcome in replicates] for plan in plans}

    gold_var = {}
    for plan in plans:
        if plan.gold:
            estimates = [v[0] for v in columns[plan.label] if not isinstance(v, str)]
            gold_var[plan.label] = float(np.var(estimates, ddof=1)) if len(estimates) > 1 else None

    rows = [
        _metrics(plan, columns[plan.label], truth, boot_d, reps, gold_var.get(plan.reference))
        for plan in plans
    ]
    return StudyResult(
        setting=spec.id,
        n=spec.n,
        reps=reps,
        boot_d=boot_d,
        seed=seed,
        truth_r_s=truth,
        missing_fraction=MissingSummary(
            min=float(np.min(fractions)), median=float(np.median(fractions)), max=float(np.max(fractions)),
        ),
        rows=rows,
    )


def _execute(spec: SettingSpec, plans: Sequence[MethodPlan], reps: int, boot_d: int, seed: int,
             threads: Optional[int]) -> StudyResult:
    logger.info(
        f"Setting {spec.id}: {reps} replicate(s) of n={spec.n}, "
        f"bootstrap D={boot_d}, methods {[plan.label for plan in plans]}"
    )
    replicates = run_parallel(
        lambda replicate: _run_replicate(spec, plans, boot_d, seed, replicate),
        range(reps),
        threads=threads,
    )
    return _summarise(spec, plans, replicates, boot_d, seed)


def run_study(
    setting: SettingSpec,
    methods: Iterable[str] = METHODS,
    reps: int = 200,
    boot_d: int = 500,
    seed: int = BOOTSTRAP_SEED,
    threads: Optional[int] = None,
    formula: Optional[Tuple[Term, ...]] = None,
    **pipeline_kwargs,
) -> StudyResult:
    plans = plan_methods(methods, setting, formula=formula, **pipeline_kwargs)
    return _execute(setting, plans, reps, boot_d, seed, threads)


def weight_misspec_sweep(
    setting: SettingSpec,
    reps: int = 200,
    seed: int = BOOTSTRAP_SEED,
    boot_d: int = 0,
    threads: Optional[int] = None,
) -> StudyResult:
    """
    Complete case plus the five IPW weight-model versions for both PTE
    estimators, on a setting whose missingness depends on Y.
    """
    if setting.id not in (3, 4):
        raise ValidationError(f"the weight-model sweep runs on settings 3 or 4, got {setting.id}")

    plans = [plan for plan in plan_methods(["cc-nonpar", "cc-par"], setting) if not plan.gold]
    for offset, (version, formula) in enumerate(SWEEP_VERSIONS.items()):
        for estimator, suffix in ((EstimatorKind.nonparametric, "nonpar"), (EstimatorKind.parametric, "par")):
            plans.append(MethodPlan(
                label=f"ipw-{suffix} ({version})",
                pipeline=Pipeline(estimator=estimator, method=MethodKind.ipw, formula=formula),
                gold=False,
                code=len(METHODS) + 2 * offset + (estimator == EstimatorKind.parametric),
                version=version,
            ))
    return _execute(setting, plans, reps, boot_d, seed, threads)


def write_results(result: StudyResult, out: Union[str, Path]) -> Tuple[Path, Path]:
    """Writes the metrics table as `<out>.csv` and the full result as `<out>.json`."""
    out = Path(out)
    csv_path, json_path = out.with_suffix(".csv"), out.with_suffix(".json")

    frame = pd.DataFrame([row.model_dump(exclude={"failure_reasons"}) for row in result.rows])
    frame.insert(0, "setting", result.setting)
    frame.to_csv(csv_path, index=False, float_format="%.6f")

    json_path.write_text(result.model_dump_json(indent=2))
    return csv_path, json_path


def load_results(path: Union[str, Path]) -> StudyResult:
    return StudyResult.model_validate(json.loads(Path(path).read_text()))
