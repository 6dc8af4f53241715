from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np


class MissingnessKind(str, Enum):
    empirical_by_arm = "empirical_by_arm"
    logistic = "logistic"


class Term(str, Enum):
    z = "z"
    y = "y"
    yz = "y:z"


@dataclass(frozen=True, eq=False)
class MissingnessModel:
    kind: MissingnessKind
    formula: Tuple[Term, ...] = ()
    coefficients: Optional[np.ndarray] = None
    arm_probs: Optional[Tuple[float, float]] = None
    iterations: int = 0
    converged: bool = True
    separation: bool = False
    all_observed: bool = False

    def to_dict(self):
        return {
            "kind": self.kind.value,
            "formula": [term.value for term in self.formula],
            "coefficients": None if self.coefficients is None else [float(c) for c in self.coefficients],
            "arm_probs": None if self.arm_probs is None else [float(p) for p in self.arm_probs],
            "iterations": self.iterations,
            "converged": self.converged,
            "separation": self.separation,
            "all_observed": self.all_observed,
        }


@dataclass(frozen=True, eq=False)
class WeightSet:
    """Per-patient observation probabilities and inverse-probability weights (0 when unobserved)."""
    probs: np.ndarray
    weights: np.ndarray
    truncation_cap: Optional[float] = None

    def __len__(self) -> int:
        return len(self.weights)

    @property
    def weight_range(self) -> Tuple[float, float]:
        positive = self.weights[self.weights > 0]
        if positive.size == 0:
            return float("nan"), float("nan")
        return float(positive.min()), float(positive.max())

    @classmethod
    def unit(cls, observed: np.ndarray) -> "WeightSet":
        observed = np.asarray(observed, dtype=bool)
        return cls(probs=np.ones(len(observed)), weights=observed.astype(float))
