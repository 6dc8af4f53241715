"""
Semiparametric maximum likelihood for the parametric PTE with missing surrogates.

The outcome model is the normal interaction regression; Pr(S | Z = z) is a
discrete distribution on the distinct observed surrogate values of arm z.
EM alternates conditional support-point probabilities (E-step) with a
weighted least-squares fit and closed-form probability update (M-step).
"""
import logging
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.special import logsumexp, softmax
from scipy.stats import norm

from config import EM_MAX_ITER, EM_SIGMA_FLOOR, EM_TOL
from surrogate.estimators.parametric import design_matrix, pte_from_components, solve_weighted
from surrogate.exceptions import EstimationError, InsufficientSupportError
from surrogate.models.fit import ArmMeans, LinearFit, PhiMatrix, SmleFit, SupportSet
from surrogate.models.trial import EstimandSet, TrialData

logger = logging.getLogger(__name__)

INITIAL_SIGMA = 0.1


@dataclass(frozen=True)
class SmleResult:
    estimands: EstimandSet
    fit: SmleFit
    support: SupportSet
    means: ArmMeans


def build_support(data: TrialData) -> SupportSet:
    points = []
    for arm in (0, 1):
        values = np.unique(data.s[data.observed_in_arm(arm)])
        if values.size < 2:
            raise InsufficientSupportError(
                f"arm {arm} has {values.size} distinct observed surrogate value(s), SMLE needs at least 2",
                arm=arm,
            )
        points.append(values)
    return SupportSet(points0=points[0], points1=points[1])


def initial_params(support: SupportSet) -> SmleFit:
    m0, m1 = support.sizes
    return SmleFit(
        beta=np.zeros(4),
        sigma=INITIAL_SIGMA,
        p0=np.full(m0, 1.0 / m0),
        p1=np.full(m1, 1.0 / m1),
    )


def _log_joint(params: SmleFit, y: np.ndarray, arm: int, points: np.ndarray) -> np.ndarray:
    """log N(y_i; mu(s_k, arm), sigma^2) + log p_k, one row per patient."""
    mu = params.linear.mean(points, arm)
    with np.errstate(divide="ignore"):
        log_p = np.log(params.probs(arm))
    return norm.logpdf(y[:, None], loc=mu[None, :], scale=params.sigma) + log_p[None, :]


def e_step(params: SmleFit, data: TrialData, support: SupportSet) -> PhiMatrix:
    if not params.sigma > 0:
        raise EstimationError(f"E-step needs a positive sigma, got {params.sigma}")

    blocks, rows = [], []
    for arm in (0, 1):
        idx = data.arm_indices(arm)
        points = support.points(arm)
        phi = np.zeros((idx.size, points.size))

        observed = data.o[idx] == 1
        if np.any(observed):
            k = np.searchsorted(points, data.s[idx[observed]])
            phi[np.flatnonzero(observed), k] = 1.0

        missing = ~observed
        if np.any(missing):
            log_joint = _log_joint(params, data.y[idx[missing]], arm, points)
            if np.any(np.all(np.isneginf(log_joint), axis=1)):
                raise EstimationError("every support point has zero conditional probability for some patient")
            phi[missing] = softmax(log_joint, axis=1)

        blocks.append(phi)
        rows.append(idx)

    return PhiMatrix(phi0=blocks[0], phi1=blocks[1], rows0=rows[0], rows1=rows[1])


def expand_pseudo_rows(phi: PhiMatrix, data: TrialData, support: SupportSet) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """One row per (patient, support point of the patient's arm) with weight phi_ki."""
    xs, ys, ws = [], [], []
    for arm in (0, 1):
        points = support.points(arm)
        idx = phi.rows(arm)
        block = phi.block(arm)
        s = np.tile(points, idx.size)
        xs.append(design_matrix(s, np.full(s.size, arm)))
        ys.append(np.repeat(data.y[idx], points.size))
        ws.append(block.ravel())
    return np.vstack(xs), np.concatenate(ys), np.concatenate(ws)


def m_step(phi: PhiMatrix, data: TrialData, support: SupportSet) -> Tuple[LinearFit, np.ndarray, np.ndarray]:
    """
    Maximises the expected complete-data log-likelihood.

    The expanded pseudo-rows of one support point share their covariates, so
    the weighted fit collapses to one row per support point carrying the
    total weight and the weighted mean outcome.
    """
    xs, ys, ws, probs = [], [], [], []
    for arm in (0, 1):
        points = support.points(arm)
        block = phi.block(arm)
        y = data.y[phi.rows(arm)]

        mass = block.sum(axis=0)
        probs.append(mass / mass.sum())

        keep = mass > 0
        xs.append(design_matrix(points[keep], np.full(int(keep.sum()), arm)))
        ys.append((block[:, keep].T @ y) / mass[keep])
        ws.append(mass[keep])

    beta = solve_weighted(np.vstack(xs), np.concatenate(ys), np.concatenate(ws))
    fit = LinearFit(beta=beta, sigma=0.0)

    rss, total = 0.0, 0.0
    for arm in (0, 1):
        block = phi.block(arm)
        residuals = data.y[phi.rows(arm)][:, None] - fit.mean(support.points(arm), arm)[None, :]
        rss += float(np.sum(block * residuals ** 2))
        total += float(block.sum())

    return LinearFit(beta=beta, sigma=float(np.sqrt(rss / total))), probs[0], probs[1]


def observed_loglik(params: SmleFit, data: TrialData, support: SupportSet) -> float:
    total = 0.0
    for arm in (0, 1):
        idx = data.arm_indices(arm)
        points = support.points(arm)
        log_joint = _log_joint(params, data.y[idx], arm, points)

        observed = data.o[idx] == 1
        if np.any(observed):
            k = np.searchsorted(points, data.s[idx[observed]])
            total += float(np.sum(log_joint[np.flatnonzero(observed), k]))
        if np.any(~observed):
            total += float(np.sum(logsumexp(log_joint[~observed], axis=1)))
    return total


def em_fit(
    data: TrialData,
    tol: float = EM_TOL,
    max_iter: int = EM_MAX_ITER,
    sigma_floor: float = EM_SIGMA_FLOOR,
    support: Optional[SupportSet] = None,
    on_iteration: Optional[Callable[[int, SmleFit], None]] = None,
) -> SmleFit:
    """
    Runs EM from beta = 0, sigma = 0.1 and uniform support probabilities until
    the largest absolute change in (beta, sigma, p0, p1) drops below `tol`.
    """
    support = support or build_support(data)
    params = initial_params(support)
    floored = False
    converged = False
    iteration = 0

    for iteration in range(1, max_iter + 1):
        phi = e_step(params, data, support)
        fit, p0, p1 = m_step(phi, data, support)

        sigma = fit.sigma
        if sigma < sigma_floor:
            if not floored:
                logger.warning(f"EM residual scale {sigma:.3g} floored at {sigma_floor:g}")
            sigma, floored = sigma_floor, True

        updated = SmleFit(beta=fit.beta, sigma=sigma, p0=p0, p1=p1, iterations=iteration)
        change = float(np.max(np.abs(updated.vector() - params.vector())))
        params = updated
        if on_iteration is not None:
            on_iteration(iteration, params)

        if change < tol:
            converged = True
            break

    if not converged:
        logger.warning(f"EM did not converge within {max_iter} iterations")

    return SmleFit(
        beta=params.beta,
        sigma=params.sigma,
        p0=params.p0,
        p1=params.p1,
        iterations=iteration,
        converged=converged,
        sigma_floored=floored,
        loglik=observed_loglik(params, data, support),
    )


def smle_alphas(fit: SmleFit, support: SupportSet) -> ArmMeans:
    return ArmMeans(
        alpha0=float(np.dot(support.points0, fit.p0)),
        alpha1=float(np.dot(support.points1, fit.p1)),
    )


def estimate_smle_full(data: TrialData, tol: float = EM_TOL, max_iter: int = EM_MAX_ITER) -> SmleResult:
    support = build_support(data)
    fit = em_fit(data, tol=tol, max_iter=max_iter, support=support)
    means = smle_alphas(fit, support)
    return SmleResult(
        estimands=pte_from_components(fit.linear, means),
        fit=fit,
        support=support,
        means=means,
    )


def estimate_parametric_smle(data: TrialData, tol: float = EM_TOL, max_iter: int = EM_MAX_ITER) -> EstimandSet:
    return estimate_smle_full(data, tol=tol, max_iter=max_iter).estimands
