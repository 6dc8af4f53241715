from dataclasses import dataclass
from typing import Tuple

import numpy as np


@dataclass(frozen=True, eq=False)
class LinearFit:
    """Coefficients of E(Y|Z,S) = b0 + b1 Z + b2 S + b3 S Z and the ML residual scale."""
    beta: np.ndarray
    sigma: float

    def mean(self, s, z):
        b0, b1, b2, b3 = self.beta
        return b0 + b1 * z + b2 * s + b3 * s * z

    def to_dict(self):
        return {"beta": [float(b) for b in self.beta], "sigma": float(self.sigma)}


@dataclass(frozen=True)
class ArmMeans:
    alpha0: float
    alpha1: float


@dataclass(frozen=True, eq=False)
class SupportSet:
    """Sorted distinct observed surrogate values per arm."""
    points0: np.ndarray
    points1: np.ndarray

    def points(self, z: int) -> np.ndarray:
        return self.points1 if z == 1 else self.points0

    @property
    def sizes(self) -> Tuple[int, int]:
        return len(self.points0), len(self.points1)


@dataclass(frozen=True, eq=False)
class SmleFit:
    beta: np.ndarray
    sigma: float
    p0: np.ndarray
    p1: np.ndarray
    iterations: int = 0
    converged: bool = False
    sigma_floored: bool = False
    loglik: float = float("nan")

    @property
    def linear(self) -> LinearFit:
        return LinearFit(beta=self.beta, sigma=self.sigma)

    def probs(self, z: int) -> np.ndarray:
        return self.p1 if z == 1 else self.p0

    def vector(self) -> np.ndarray:
        # concatenated (beta, sigma, p0, p1), the space the convergence check works in
        return np.concatenate([self.beta, [self.sigma], self.p0, self.p1])

    def to_dict(self):
        return {
            "beta": [float(b) for b in self.beta],
            "sigma": float(self.sigma),
            "iterations": self.iterations,
            "converged": self.converged,
            "sigma_floored": self.sigma_floored,
            "loglik": float(self.loglik),
        }


@dataclass(frozen=True, eq=False)
class PhiMatrix:
    """
    Conditional support-point probabilities, one block per arm.

    `phi0[r, k]` belongs to patient `rows0[r]` and support point `points0[k]`;
    observed patients hold a one-hot row at their own surrogate value.
    """
    phi0: np.ndarray
    phi1: np.ndarray
    rows0: np.ndarray
    rows1: np.ndarray

    def block(self, z: int) -> np.ndarray:
        return self.phi1 if z == 1 else self.phi0

    def rows(self, z: int) -> np.ndarray:
        return self.rows1 if z == 1 else self.rows0

    def row_of(self, patient: int) -> np.ndarray:
        for z in (0, 1):
            hit = np.flatnonzero(self.rows(z) == patient)
            if hit.size:
                return self.block(z)[hit[0]]
        raise IndexError(patient)
