"""
Stratified bootstrap inference for any estimator returning an EstimandSet.

Each replicate resamples n0 control and n1 treated patients with replacement
and reruns the whole estimation pipeline. Replicate d draws from the stream
keyed (seed, *key, bootstrap, d), so results do not depend on the order in
which workers pick replicates up.
"""
import logging
from collections import Counter
from typing import Callable, Optional, Sequence

import numpy as np

from config import BOOTSTRAP_MIN_SUCCESS, BOOTSTRAP_REPLICATES, BOOTSTRAP_SEED
from surrogate.exceptions import EstimationError, InferenceUnreliableError, ValidationError
from surrogate.models.bootstrap import ESTIMANDS, BootstrapResult, Interval
from surrogate.models.trial import EstimandSet, TrialData
from surrogate.utils.concurrency import run_parallel
from surrogate.utils.random import Stream, generator

logger = logging.getLogger(__name__)

Z_975 = 1.96

Estimator = Callable[[TrialData], EstimandSet]


def stratified_resample(data: TrialData, rng: np.random.Generator) -> TrialData:
    picks = []
    for arm in (0, 1):
        idx = data.arm_indices(arm)
        picks.append(idx[rng.integers(0, idx.size, size=idx.size)])
    return data.take(np.concatenate(picks))


def _as_row(estimands: EstimandSet) -> np.ndarray:
    return np.array([estimands.delta, estimands.delta_s, estimands.r_s], dtype=float)


def bootstrap_inference(
    data: TrialData,
    estimator: Estimator,
    d: int = BOOTSTRAP_REPLICATES,
    seed: int = BOOTSTRAP_SEED,
    threads: Optional[int] = None,
    key: Sequence[int] = (),
    min_success: float = BOOTSTRAP_MIN_SUCCESS,
) -> BootstrapResult:
    point = estimator(data)

    def replicate(index: int):
        sample = stratified_resample(data, generator(seed, *key, Stream.bootstrap, index))
        try:
            row = _as_row(estimator(sample))
        except (EstimationError, ValidationError) as exc:
            return type(exc).__name__
        if not np.all(np.isfinite(row)):
            return "NonFiniteEstimate"
        return row

    outcomes = run_parallel(replicate, range(d), threads=threads)
    reasons = Counter(o for o in outcomes if isinstance(o, str))
    values = np.array([o for o in outcomes if not isinstance(o, str)]).reshape(-1, len(ESTIMANDS))

    d_effective = values.shape[0]
    if reasons:
        logger.warning(f"{sum(reasons.values())}/{d} bootstrap replicate(s) failed: {dict(reasons)}")
    if d_effective < min_success * d or (d > 0 and d_effective == 0):
        dominant = reasons.most_common(1)[0][0] if reasons else "unknown"
        raise InferenceUnreliableError(
            f"only {d_effective}/{d} bootstrap replicates succeeded (mostly {dominant})",
            reason=dominant,
        )

    centre = _as_row(point)
    se = values.std(axis=0, ddof=1) if d_effective > 1 else np.zeros(len(ESTIMANDS))
    if d_effective:
        lo_q, hi_q = np.quantile(values, [0.025, 0.975], axis=0)
    else:
        lo_q = hi_q = np.full(len(ESTIMANDS), np.nan)

    return BootstrapResult(
        point=point,
        se=EstimandSet(*(float(v) for v in se)),
        ci_wald={
            name: Interval(lo=float(centre[j] - Z_975 * se[j]), hi=float(centre[j] + Z_975 * se[j]))
            for j, name in enumerate(ESTIMANDS)
        },
        ci_quantile={
            name: Interval(lo=float(lo_q[j]), hi=float(hi_q[j]))
            for j, name in enumerate(ESTIMANDS)
        },
        d_requested=d,
        d_effective=d_effective,
        failures=d - d_effective,
        failure_reasons=dict(sorted(reasons.items())),
    )
