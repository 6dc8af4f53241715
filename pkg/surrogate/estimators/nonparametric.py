"""
Kernel-based nonparametric PTE estimation.

delta is the difference of outcome means over every patient. delta_s averages
a Nadaraya-Watson estimate of E(Y | S, Z=1) over the observed control
surrogates and subtracts the control outcome mean. Observation flags and
inverse-probability weights enter both the treated-arm smoother and the
control-arm average.
"""
import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import stats

from surrogate.exceptions import UndefinedPTEError, ValidationError, ZeroSpreadError
from surrogate.models.kernel import KernelKind, KernelSpec, OverlapReport
from surrogate.models.trial import EstimandSet, TrialData
from surrogate.models.weights import WeightSet

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class NonparametricResult:
    estimands: EstimandSet
    overlap: OverlapReport
    kernel: KernelSpec
    n_extrapolated: int


def select_bandwidth(s_values) -> float:
    """Silverman's rule of thumb, undersmoothed by an extra m^(-1/10)."""
    s_values = np.asarray(s_values, dtype=float)
    m = s_values.size
    if m < 2 or np.unique(s_values).size < 2:
        raise ZeroSpreadError("bandwidth needs at least two distinct surrogate values")

    sd = float(np.std(s_values, ddof=1))
    iqr = float(stats.iqr(s_values))
    spread = min(sd, iqr / 1.34) if iqr > 0 else sd
    return 0.9 * spread * m ** (-0.2) * m ** (-0.1)


def _nearest_neighbour(targets: np.ndarray, s1: np.ndarray, y1: np.ndarray) -> np.ndarray:
    distance = np.abs(s1[None, :] - targets[:, None])
    nearest = distance == distance.min(axis=1, keepdims=True)
    return (nearest * y1[None, :]).sum(axis=1) / nearest.sum(axis=1)


def nw_conditional_means(targets, s1, y1, w1, kernel: KernelSpec) -> Tuple[np.ndarray, np.ndarray]:
    """
    Weighted Nadaraya-Watson estimates at every target.

    Returns the estimates and a boolean mask of targets that fell outside the
    kernel reach of every support point and were filled by nearest neighbour.
    """
    targets = np.atleast_1d(np.asarray(targets, dtype=float))
    s1 = np.asarray(s1, dtype=float)
    y1 = np.asarray(y1, dtype=float)
    w1 = np.asarray(w1, dtype=float)

    if s1.size == 0:
        raise ValidationError("kernel smoother needs at least one support point")
    if not (s1.size == y1.size == w1.size):
        raise ValidationError("s1, y1 and w1 must have the same length")
    if np.any(w1 < 0) or not np.any(w1 > 0):
        raise ValidationError("kernel weights must be non-negative and not all zero")

    mass = kernel.weights(s1[None, :] - targets[:, None]) * w1[None, :]
    denominator = mass.sum(axis=1)
    extrapolated = denominator <= 0.0

    estimates = np.empty_like(targets)
    inside = ~extrapolated
    estimates[inside] = (mass[inside] @ y1) / denominator[inside]
    if np.any(extrapolated):
        keep = w1 > 0
        estimates[extrapolated] = _nearest_neighbour(targets[extrapolated], s1[keep], y1[keep])
    return estimates, extrapolated


def nw_conditional_mean(s0: float, s1, y1, w1, kernel: KernelSpec) -> Tuple[float, bool]:
    estimates, extrapolated = nw_conditional_means([s0], s1, y1, w1, kernel)
    return float(estimates[0]), bool(extrapolated[0])


def check_overlap(data: TrialData) -> OverlapReport:
    s0 = data.s[data.observed_in_arm(0)]
    s1 = data.s[data.observed_in_arm(1)]
    for arm, values in ((0, s0), (1, s1)):
        if values.size == 0:
            raise ValidationError(f"no observed surrogate in arm {arm}")

    lo, hi = float(s1.min()), float(s1.max())
    return OverlapReport(
        min0=float(s0.min()), max0=float(s0.max()),
        min1=lo, max1=hi,
        n_outside=int(np.sum((s0 < lo) | (s0 > hi))),
    )


def estimate_nonparametric_full(
    data: TrialData,
    weights: Optional[WeightSet] = None,
    kernel: Optional[KernelSpec] = None,
) -> NonparametricResult:
    if weights is not None and len(weights) != len(data):
        raise ValidationError("weight set does not match the data")

    idx0 = data.observed_in_arm(0)
    idx1 = data.observed_in_arm(1)
    for arm, idx in ((0, idx0), (1, idx1)):
        if idx.size < 2:
            raise ValidationError(f"arm {arm} needs at least two observed surrogates")

    overlap = check_overlap(data)
    if kernel is None:
        kernel = KernelSpec(kind=KernelKind.epanechnikov, bandwidth=select_bandwidth(data.s[idx1]))

    w0 = np.ones(idx0.size) if weights is None else weights.weights[idx0]
    w1 = np.ones(idx1.size) if weights is None else weights.weights[idx1]

    mu1, extrapolated = nw_conditional_means(data.s[idx0], data.s[idx1], data.y[idx1], w1, kernel)

    y0_mean = float(np.mean(data.y[data.z == 0]))
    y1_mean = float(np.mean(data.y[data.z == 1]))
    delta = y1_mean - y0_mean
    delta_s = float(np.sum(w0 * mu1) / np.sum(w0)) - y0_mean
    if delta == 0.0:
        raise UndefinedPTEError()

    n_extrapolated = int(np.sum(extrapolated))
    if not overlap.ok:
        logger.debug(
            f"{overlap.n_outside} control surrogate(s) outside the treated range "
            f"[{overlap.min1:.4g}, {overlap.max1:.4g}]; {n_extrapolated} extrapolated by nearest neighbour"
        )

    return NonparametricResult(
        estimands=EstimandSet(delta=delta, delta_s=delta_s, r_s=1.0 - delta_s / delta),
        overlap=overlap,
        kernel=kernel,
        n_extrapolated=n_extrapolated,
    )


def estimate_nonparametric(
    data: TrialData,
    weights: Optional[WeightSet] = None,
    kernel: Optional[KernelSpec] = None,
) -> EstimandSet:
    return estimate_nonparametric_full(data, weights, kernel).estimands
