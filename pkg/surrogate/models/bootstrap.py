from typing import Dict

from pydantic import BaseModel, ConfigDict, Field

from surrogate.models.trial import EstimandSet

ESTIMANDS = ("delta", "delta_s", "r_s")


class Interval(BaseModel):
    lo: float
    hi: float

    @property
    def width(self) -> float:
        return self.hi - self.lo


class BootstrapResult(BaseModel):
    point: EstimandSet
    se: EstimandSet
    ci_wald: Dict[str, Interval]
    ci_quantile: Dict[str, Interval]
    d_requested: int = Field(ge=0)
    d_effective: int = Field(ge=0)
    failures: int = Field(ge=0)
    failure_reasons: Dict[str, int] = Field(default_factory=dict)
    model_config = ConfigDict(frozen=True)

    def covers(self, truth: float, estimand: str = "r_s", style: str = "wald") -> bool:
        interval = (self.ci_wald if style == "wald" else self.ci_quantile)[estimand]
        return interval.lo <= truth <= interval.hi
