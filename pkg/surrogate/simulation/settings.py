from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, Tuple

import numpy as np
from scipy.special import expit

from config import SIM_N
from surrogate.exceptions import ValidationError
from surrogate.models.weights import Term


class MissingnessLaw(str, Enum):
    constant = "constant"
    logit_z = "logit_z"
    logit_y = "logit_y"
    logit_y_yz = "logit_y_yz"


@dataclass(frozen=True)
class SettingSpec:
    id: int
    missingness: MissingnessLaw
    n: int = SIM_N
    # (mean, variance) of S given Z = 0 and Z = 1
    surrogate0: Tuple[float, float] = (5.0, 1.0)
    surrogate1: Tuple[float, float] = (6.0, 4.0)
    beta: Tuple[float, float, float, float] = (2.0, 1.0, 5.0, 1.0)
    error_sd: float = 1.0
    ipw_formula: Tuple[Term, ...] = field(default=(Term.z,))

    def __post_init__(self):
        if self.n < 4 or self.n % 2:
            raise ValidationError(f"trial size must be even and at least 4, got {self.n}")

    def with_n(self, n: int) -> "SettingSpec":
        return replace(self, n=n)

    def observation_probs(self, y: np.ndarray, z: np.ndarray) -> np.ndarray:
        if self.missingness == MissingnessLaw.constant:
            return np.full(y.shape, 0.65)
        if self.missingness == MissingnessLaw.logit_z:
            return expit(0.4 + 0.2 * z)
        if self.missingness == MissingnessLaw.logit_y:
            return expit(0.015 * y)
        return expit(0.015 * y + 0.015 * y * z)


SETTINGS: Dict[int, SettingSpec] = {
    1: SettingSpec(id=1, missingness=MissingnessLaw.constant, ipw_formula=(Term.z,)),
    2: SettingSpec(id=2, missingness=MissingnessLaw.logit_z, ipw_formula=(Term.z,)),
    3: SettingSpec(id=3, missingness=MissingnessLaw.logit_y, ipw_formula=(Term.y,)),
    4: SettingSpec(id=4, missingness=MissingnessLaw.logit_y_yz, ipw_formula=(Term.y, Term.yz)),
    5: SettingSpec(id=5, missingness=MissingnessLaw.logit_y, surrogate1=(6.0, 0.25), ipw_formula=(Term.y,)),
}

# Weight-model versions compared under misspecification
SWEEP_VERSIONS: Dict[str, Tuple[Term, ...]] = {
    "i": (Term.y,),
    "ii": (Term.z,),
    "iii": (Term.z, Term.y),
    "iv": (Term.z, Term.y, Term.yz),
    "v": (Term.y, Term.yz),
}


def get_setting(setting_id: int, n: int = SIM_N) -> SettingSpec:
    try:
        spec = SETTINGS[int(setting_id)]
    except (KeyError, ValueError):
        raise ValidationError(f"unknown setting {setting_id}, expected one of {sorted(SETTINGS)}")
    return spec if n == spec.n else spec.with_n(n)
