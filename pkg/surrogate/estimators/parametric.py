"""
Parametric PTE estimation on the interaction model

    E(Y | Z, S) = b0 + b1 Z + b2 S + b3 S Z

with plug-in treatment effects

    delta   = b1 + (b2 + b3) a1 - b2 a0
    delta_s = b1 + b3 a0
    r_s     = 1 - delta_s / delta

where a_z = E(S | Z = z).
"""
import logging
from typing import Optional, Tuple

import numpy as np

from config import RANK_TOL
from surrogate.exceptions import SingularDesignError, UndefinedPTEError, ValidationError
from surrogate.models.fit import ArmMeans, LinearFit
from surrogate.models.trial import EstimandSet, TrialData
from surrogate.models.weights import WeightSet

logger = logging.getLogger(__name__)


def design_matrix(s: np.ndarray, z: np.ndarray) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    z = np.asarray(z, dtype=float)
    return np.column_stack([np.ones_like(s), z, s, s * z])


def solve_weighted(x: np.ndarray, y: np.ndarray, weights: np.ndarray, rank_tol: float = RANK_TOL) -> np.ndarray:
    """Weighted least squares through the SVD of the sqrt-weighted design."""
    root = np.sqrt(weights)
    xw = x * root[:, None]
    yw = y * root

    u, sv, vt = np.linalg.svd(xw, full_matrices=False)
    if sv.size < x.shape[1] or sv[-1] <= rank_tol * sv[0]:
        ratio = sv[-1] / sv[0] if sv.size == x.shape[1] and sv[0] > 0 else 0.0
        raise SingularDesignError(f"design matrix is rank deficient (singular value ratio {ratio:.3g})")

    return vt.T @ ((u.T @ yw) / sv)


def fit_wls(y, s, z, weights=None, rank_tol: float = RANK_TOL) -> LinearFit:
    y = np.asarray(y, dtype=float)
    s = np.asarray(s, dtype=float)
    z = np.asarray(z, dtype=float)
    weights = np.ones_like(y) if weights is None else np.asarray(weights, dtype=float)

    if not (len(y) == len(s) == len(z) == len(weights)):
        raise ValidationError("y, s, z and weights must have the same length")
    if np.any(~np.isfinite(s)):
        raise ValidationError("fit_wls needs every surrogate value present")
    if np.any(weights <= 0) or np.any(~np.isfinite(weights)):
        raise ValidationError("weights must be positive and finite")

    x = design_matrix(s, z)
    beta = solve_weighted(x, y, weights, rank_tol=rank_tol)
    residuals = y - x @ beta
    sigma = float(np.sqrt(np.sum(weights * residuals ** 2) / np.sum(weights)))
    return LinearFit(beta=beta, sigma=sigma)


def pte_from_components(fit: LinearFit, means: ArmMeans) -> EstimandSet:
    _, b1, b2, b3 = (float(b) for b in fit.beta)
    a0, a1 = means.alpha0, means.alpha1

    delta = b1 + (b2 + b3) * a1 - b2 * a0
    delta_s = b1 + b3 * a0
    if delta == 0.0 or not np.isfinite(delta):
        raise UndefinedPTEError()

    return EstimandSet(delta=delta, delta_s=delta_s, r_s=1.0 - delta_s / delta)


def r_s_closed_form(fit: LinearFit, means: ArmMeans) -> float:
    _, b1, b2, b3 = (float(b) for b in fit.beta)
    a0, a1 = means.alpha0, means.alpha1
    delta = b1 + (b2 + b3) * a1 - b2 * a0
    if delta == 0.0:
        raise UndefinedPTEError()
    return (b2 + b3) * (a1 - a0) / delta


def observed_arm_means(data: TrialData, weights: Optional[WeightSet] = None) -> ArmMeans:
    """Complete-case means of S per arm, or Horvitz-Thompson means when weights are given."""
    alphas = []
    for arm in (0, 1):
        idx = data.observed_in_arm(arm)
        if idx.size == 0:
            raise ValidationError(f"no observed surrogate in arm {arm}")
        w = np.ones(idx.size) if weights is None else weights.weights[idx]
        alphas.append(float(np.sum(w * data.s[idx]) / np.sum(w)))
    return ArmMeans(alpha0=alphas[0], alpha1=alphas[1])


def fit_parametric(data: TrialData, weights: Optional[WeightSet] = None) -> Tuple[LinearFit, ArmMeans]:
    if weights is not None and len(weights) != len(data):
        raise ValidationError("weight set does not match the data")

    idx = np.flatnonzero(data.observed)
    w = None if weights is None else weights.weights[idx]
    fit = fit_wls(data.y[idx], data.s[idx], data.z[idx], w)
    return fit, observed_arm_means(data, weights)


def estimate_parametric(data: TrialData, weights: Optional[WeightSet] = None) -> EstimandSet:
    fit, means = fit_parametric(data, weights)
    return pte_from_components(fit, means)
