from dataclasses import asdict, dataclass
from enum import Enum

import numpy as np

from surrogate.exceptions import ValidationError


class KernelKind(str, Enum):
    epanechnikov = "epanechnikov"
    triweight = "triweight"


def epanechnikov(u: np.ndarray) -> np.ndarray:
    return np.where(np.abs(u) < 1.0, 0.75 * (1.0 - u * u), 0.0)


def triweight(u: np.ndarray) -> np.ndarray:
    return np.where(np.abs(u) < 1.0, 35.0 / 32.0 * (1.0 - u * u) ** 3, 0.0)


KERNELS = {
    KernelKind.epanechnikov: epanechnikov,
    KernelKind.triweight: triweight,
}


@dataclass(frozen=True)
class KernelSpec:
    kind: KernelKind = KernelKind.epanechnikov
    bandwidth: float = 1.0

    def __post_init__(self):
        if not self.bandwidth > 0 or not np.isfinite(self.bandwidth):
            raise ValidationError(f"bandwidth must be positive, got {self.bandwidth}")

    def weights(self, distance: np.ndarray) -> np.ndarray:
        """K_h(d) = K(d / h) / h."""
        return KERNELS[KernelKind(self.kind)](distance / self.bandwidth) / self.bandwidth

    def to_dict(self):
        return {"kind": KernelKind(self.kind).value, "bandwidth": float(self.bandwidth)}


@dataclass(frozen=True)
class OverlapReport:
    min0: float
    max0: float
    min1: float
    max1: float
    n_outside: int

    @property
    def ok(self) -> bool:
        return self.n_outside == 0

    def to_dict(self):
        return {**asdict(self), "ok": self.ok}
