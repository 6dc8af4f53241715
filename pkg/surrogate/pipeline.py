import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Optional, Tuple

from config import EM_MAX_ITER, EM_TOL
from surrogate.data import complete_cases, missing_fraction
from surrogate.estimators.missingness import fit_missingness, parse_formula, weights_from_model
from surrogate.estimators.nonparametric import estimate_nonparametric_full, select_bandwidth
from surrogate.estimators.parametric import fit_parametric, pte_from_components
from surrogate.estimators.smle import estimate_smle_full
from surrogate.exceptions import ConfigError
from surrogate.models.kernel import KernelKind, KernelSpec
from surrogate.models.trial import EstimandSet, TrialData
from surrogate.models.weights import Term

logger = logging.getLogger(__name__)


class EstimatorKind(str, Enum):
    parametric = "parametric"
    nonparametric = "nonparametric"


class MethodKind(str, Enum):
    cc = "cc"
    ipw = "ipw"
    smle = "smle"


@dataclass(frozen=True)
class PipelineOutcome:
    estimands: EstimandSet
    diagnostics: Dict[str, Any]


@dataclass(frozen=True)
class Pipeline:
    """
    One full estimation pipeline; calling it on a dataset refits every
    nuisance piece (missingness model, bandwidth, EM) from that dataset.
    """
    estimator: EstimatorKind = EstimatorKind.parametric
    method: MethodKind = MethodKind.cc
    formula: Optional[Tuple[Term, ...]] = field(default=(Term.z,))
    kernel: KernelKind = KernelKind.epanechnikov
    bandwidth: Optional[float] = None
    cap: Optional[float] = None
    tol: float = EM_TOL
    max_iter: int = EM_MAX_ITER

    def __post_init__(self):
        if self.method == MethodKind.smle and self.estimator == EstimatorKind.nonparametric:
            raise ConfigError("SMLE is only available for the parametric estimator")

    @classmethod
    def build(cls, estimator, method, weights: Optional[str] = None, **kwargs) -> "Pipeline":
        return cls(
            estimator=EstimatorKind(estimator),
            method=MethodKind(method),
            formula=parse_formula(weights),
            **kwargs,
        )

    @property
    def label(self) -> str:
        if self.method == MethodKind.smle:
            return "smle"
        suffix = "par" if self.estimator == EstimatorKind.parametric else "nonpar"
        return f"{self.method.value}-{suffix}"

    def __call__(self, data: TrialData) -> EstimandSet:
        return self.run(data).estimands

    def run(self, data: TrialData) -> PipelineOutcome:
        arm0, arm1 = missing_fraction(data)
        diagnostics: Dict[str, Any] = {"missing_fraction": {"arm0": arm0, "arm1": arm1}}

        weights = None
        if self.method == MethodKind.ipw:
            model = fit_missingness(data, self.formula if self.formula is not None else "empirical")
            weights = weights_from_model(model, data, cap=self.cap)
            lo, hi = weights.weight_range
            diagnostics["missingness_model"] = model.to_dict()
            diagnostics["weight_range"] = {"min": lo, "max": hi}

        if self.method == MethodKind.smle:
            result = estimate_smle_full(data, tol=self.tol, max_iter=self.max_iter)
            m0, m1 = result.support.sizes
            diagnostics["em"] = result.fit.to_dict()
            diagnostics["support_points"] = {"arm0": m0, "arm1": m1}
            diagnostics["arm_means"] = {"alpha0": result.means.alpha0, "alpha1": result.means.alpha1}
            return PipelineOutcome(result.estimands, diagnostics)

        if self.estimator == EstimatorKind.parametric:
            fit, means = fit_parametric(data, weights)
            diagnostics["fit"] = fit.to_dict()
            diagnostics["arm_means"] = {"alpha0": means.alpha0, "alpha1": means.alpha1}
            return PipelineOutcome(pte_from_components(fit, means), diagnostics)

        # complete case drops unobserved patients from delta as well; IPW keeps them
        if self.method == MethodKind.cc:
            data = complete_cases(data)
        bandwidth = self.bandwidth
        if bandwidth is None:
            bandwidth = select_bandwidth(data.s[data.observed_in_arm(1)])
        result = estimate_nonparametric_full(data, weights, KernelSpec(kind=self.kernel, bandwidth=bandwidth))
        diagnostics["kernel"] = result.kernel.to_dict()
        diagnostics["overlap"] = result.overlap.to_dict()
        diagnostics["n_extrapolated"] = result.n_extrapolated
        return PipelineOutcome(result.estimands, diagnostics)
