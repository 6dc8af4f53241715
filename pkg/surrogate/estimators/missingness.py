import logging
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import expit, log_expit

from config import IRLS_MAX_ITER, IRLS_TOL, RANK_TOL
from surrogate.exceptions import (ConfigError, DegenerateProbabilityError, NearZeroProbabilityError,
                                  SingularDesignError, ValidationError)
from surrogate.models.trial import TrialData
from surrogate.models.weights import MissingnessKind, MissingnessModel, Term, WeightSet

logger = logging.getLogger(__name__)

EMPIRICAL = "empirical"
DEFAULT_FORMULA: Tuple[Term, ...] = (Term.z,)
MIN_PROB = 1e-12
SEPARATION_EPS = 1e-10

FormulaLike = Union[str, Sequence[Union[str, Term]], None]


def parse_formula(text: FormulaLike) -> Optional[Tuple[Term, ...]]:
    """
    Parses the weight-formula mini-language, e.g. "y,z,y:z".

    Returns None for "empirical" (observed fraction per arm); an empty string
    means an intercept-only logistic model. Terms keep the canonical order
    z, y, y:z.
    """
    if text is None:
        return DEFAULT_FORMULA
    if isinstance(text, str):
        if text.strip().lower() == EMPIRICAL:
            return None
        parts = [p.strip().lower() for p in text.split(",") if p.strip()]
    else:
        parts = [p.value if isinstance(p, Term) else str(p).strip().lower() for p in text]

    terms = set()
    for part in parts:
        if part in ("z:y", "yz", "zy", "y*z", "z*y", "y×z", "z×y"):
            part = Term.yz.value
        try:
            terms.add(Term(part))
        except ValueError:
            raise ConfigError(f'unknown weight term "{part}", expected any of z, y, y:z')
    return tuple(term for term in Term if term in terms)


def fit_empirical(data: TrialData) -> MissingnessModel:
    probs = []
    for arm in (0, 1):
        flags = data.o[data.z == arm]
        prob = float(np.mean(flags))
        if prob <= 0.0:
            raise DegenerateProbabilityError(f"no observed surrogate in arm {arm}")
        probs.append(prob)
    return MissingnessModel(kind=MissingnessKind.empirical_by_arm, arm_probs=(probs[0], probs[1]))


def logistic_design(data: TrialData, formula: Iterable[Term]) -> np.ndarray:
    columns = [np.ones(len(data))]
    z = data.z.astype(float)
    for term in formula:
        if term == Term.z:
            columns.append(z)
        elif term == Term.y:
            columns.append(data.y)
        elif term == Term.yz:
            columns.append(data.y * z)
    return np.column_stack(columns)


def bernoulli_loglik(x: np.ndarray, o: np.ndarray, coef: np.ndarray) -> float:
    eta = x @ coef
    return float(np.sum(o * log_expit(eta) + (1 - o) * log_expit(-eta)))


def fit_logistic(
    data: TrialData,
    formula: Sequence[Term] = DEFAULT_FORMULA,
    tol: float = IRLS_TOL,
    max_iter: int = IRLS_MAX_ITER,
) -> MissingnessModel:
    """
    Logistic model for Pr(O = 1 | y, z) fitted by iteratively reweighted least squares.

    Starts from zero coefficients and halves the Newton step whenever the
    log-likelihood would decrease. Convergence is judged on the full Newton
    step, never on a halved one.
    """
    formula = tuple(formula)
    x = logistic_design(data, formula)
    o = data.o.astype(float)

    if not np.any(o == 1):
        raise DegenerateProbabilityError("no observed surrogate, the observation model cannot be fitted")
    if np.all(o == 1):
        logger.debug("Every surrogate is observed; observation probabilities are 1")
        return MissingnessModel(kind=MissingnessKind.logistic, formula=formula, all_observed=True)

    sv = np.linalg.svd(x, compute_uv=False)
    if sv[-1] <= RANK_TOL * sv[0]:
        raise SingularDesignError(f"missingness design for formula {[t.value for t in formula]} is rank deficient")

    coef = np.zeros(x.shape[1])
    loglik = bernoulli_loglik(x, o, coef)
    converged = False
    iteration = 0

    for iteration in range(1, max_iter + 1):
        p = expit(x @ coef)
        w = p * (1.0 - p)
        score = x.T @ (o - p)
        information = x.T @ (x * w[:, None])
        try:
            newton = np.linalg.solve(information, score)
        except np.linalg.LinAlgError:
            newton = np.linalg.lstsq(information, score, rcond=None)[0]

        step = newton
        for _ in range(30):
            candidate = coef + step
            candidate_loglik = bernoulli_loglik(x, o, candidate)
            if candidate_loglik >= loglik - 1e-12:
                break
            step = step / 2.0

        coef, loglik = candidate, candidate_loglik
        if np.max(np.abs(newton)) < tol:
            converged = True
            break

    if not converged:
        logger.warning(f"IRLS did not converge in {max_iter} iterations for formula {[t.value for t in formula]}")

    fitted = expit(x @ coef)
    separation = bool(
        np.all(fitted[o == 1] > 1.0 - SEPARATION_EPS) or np.all(fitted[o == 0] < SEPARATION_EPS)
    )
    if separation:
        logger.warning("Separation detected in the missingness model; fitted probabilities hit 0 or 1")

    return MissingnessModel(
        kind=MissingnessKind.logistic,
        formula=formula,
        coefficients=coef,
        iterations=iteration,
        converged=converged,
        separation=separation,
    )


def fit_missingness(data: TrialData, formula: FormulaLike = None) -> MissingnessModel:
    terms = parse_formula(formula)
    if terms is None:
        return fit_empirical(data)
    return fit_logistic(data, terms)


def predict_probs(model: MissingnessModel, data: TrialData) -> np.ndarray:
    if model.all_observed:
        return np.ones(len(data))
    if model.kind == MissingnessKind.empirical_by_arm:
        return np.where(data.z == 1, model.arm_probs[1], model.arm_probs[0]).astype(float)
    return expit(logistic_design(data, model.formula) @ model.coefficients)


def weights_from_model(model: MissingnessModel, data: TrialData, cap: Optional[float] = None) -> WeightSet:
    if cap is not None and not cap > 0:
        raise ValidationError(f"weight cap must be positive, got {cap}")

    probs = predict_probs(model, data)
    observed = data.observed
    if np.any(probs[observed] <= MIN_PROB):
        raise NearZeroProbabilityError(
            f"{int(np.sum(probs[observed] <= MIN_PROB))} observed patient(s) have a fitted "
            f"observation probability below {MIN_PROB:g}; inverse weights are unstable"
        )

    weights = np.zeros(len(data))
    weights[observed] = 1.0 / probs[observed]
    if cap is not None:
        n_capped = int(np.sum(weights > cap))
        if n_capped:
            logger.debug(f"Truncated {n_capped} weight(s) at {cap}")
        weights = np.minimum(weights, cap)

    return WeightSet(probs=probs, weights=weights, truncation_cap=cap)
