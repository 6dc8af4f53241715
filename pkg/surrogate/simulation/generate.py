from dataclasses import dataclass

import numpy as np

from surrogate.estimators.parametric import pte_from_components
from surrogate.models.fit import ArmMeans, LinearFit
from surrogate.models.trial import EstimandSet, TrialData
from surrogate.simulation.settings import SettingSpec
from surrogate.utils.random import Stream, generator


@dataclass(frozen=True)
class GeneratedTrial:
    full: TrialData
    masked: TrialData
    truth: EstimandSet

    @property
    def missing_fraction(self) -> float:
        return float(1.0 - np.mean(self.masked.o))


def true_estimands(spec: SettingSpec) -> EstimandSet:
    return pte_from_components(
        LinearFit(beta=np.asarray(spec.beta, dtype=float), sigma=spec.error_sd),
        ArmMeans(alpha0=spec.surrogate0[0], alpha1=spec.surrogate1[0]),
    )


def generate_trial(spec: SettingSpec, seed: int, replicate: int = 0) -> GeneratedTrial:
    """
    Simulates one trial: n/2 patients per arm, S | Z normal, Y from the
    interaction model with N(0, error_sd^2) noise, then O ~ Bernoulli from the
    setting's missingness law.

    The surrogate and error streams do not depend on the missingness law, so
    settings sharing a surrogate law share their full data for a given seed.
    """
    half = spec.n // 2
    z = np.repeat([0, 1], half)

    rng_s = generator(seed, replicate, Stream.surrogate)
    s = np.concatenate([
        rng_s.normal(spec.surrogate0[0], np.sqrt(spec.surrogate0[1]), size=half),
        rng_s.normal(spec.surrogate1[0], np.sqrt(spec.surrogate1[1]), size=half),
    ])

    b0, b1, b2, b3 = spec.beta
    epsilon = generator(seed, replicate, Stream.error).normal(0.0, spec.error_sd, size=spec.n)
    y = b0 + b1 * z + b2 * s + b3 * s * z + epsilon

    u = generator(seed, replicate, Stream.mask).random(spec.n)
    observed = u < spec.observation_probs(y, z)

    return GeneratedTrial(
        full=TrialData.from_arrays(y=y, s=s, z=z),
        masked=TrialData.from_arrays(y=y, s=np.where(observed, s, np.nan), z=z),
        truth=true_estimands(spec),
    )
