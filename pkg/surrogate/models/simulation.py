from typing import Dict, List, Optional

from pydantic import BaseModel, Field


class MetricsRow(BaseModel):
    method: str
    version: Optional[str] = None
    formula: Optional[str] = None
    bias: Optional[float] = None
    pct_bias: Optional[float] = None
    ese: Optional[float] = None
    ase: Optional[float] = None
    cp_n: Optional[float] = None
    cp_q: Optional[float] = None
    re: Optional[float] = None
    n_success: int = 0
    failures: int = 0
    failure_reasons: Dict[str, int] = Field(default_factory=dict)
    flagged: bool = False


class MissingSummary(BaseModel):
    min: float
    median: float
    max: float


class StudyResult(BaseModel):
    setting: int
    n: int
    reps: int
    boot_d: int
    seed: int
    truth_r_s: float
    missing_fraction: MissingSummary
    rows: List[MetricsRow]

    def row(self, method: str) -> MetricsRow:
        for row in self.rows:
            if row.method == method:
                return row
        raise KeyError(method)
