from dataclasses import asdict, dataclass, field
from typing import Iterator, Optional, Sequence, Tuple

import numpy as np

from surrogate.exceptions import EmptyArmError, ValidationError


@dataclass(frozen=True)
class PatientRecord:
    y: float
    s: Optional[float]
    z: int
    o: int

    @property
    def observed(self) -> bool:
        return self.o == 1


def _readonly(values: np.ndarray) -> np.ndarray:
    values.setflags(write=False)
    return values


@dataclass(frozen=True, eq=False)
class TrialData:
    """
    Two-arm trial with a complete outcome and a possibly missing surrogate.

    Stored column-wise; a missing surrogate is NaN in `s` and 0 in `o`.
    Instances are immutable and may be shared between worker threads.
    """
    y: np.ndarray
    s: np.ndarray
    z: np.ndarray
    o: np.ndarray = field(repr=False)

    @classmethod
    def from_arrays(cls, y: Sequence[float], s: Sequence[Optional[float]], z: Sequence[int]) -> "TrialData":
        y = np.asarray(y, dtype=float)
        s = np.array([np.nan if v is None else v for v in s], dtype=float)
        z = np.asarray(z)

        if not (len(y) == len(s) == len(z)):
            raise ValidationError("y, s and z must have the same length")
        if not np.all(np.isfinite(y)):
            raise ValidationError("outcome y must be present and finite for every patient")
        if not np.all(np.isin(z, (0, 1))):
            raise ValidationError("arm indicator z must be 0 or 1")

        z = z.astype(np.int8)
        for arm in (0, 1):
            if not np.any(z == arm):
                raise EmptyArmError(f"empty arm {arm}", arm=arm)

        o = np.isfinite(s).astype(np.int8)
        return cls(y=_readonly(y), s=_readonly(s), z=_readonly(z), o=_readonly(o))

    def __len__(self) -> int:
        return len(self.y)

    @property
    def n0(self) -> int:
        return int(np.sum(self.z == 0))

    @property
    def n1(self) -> int:
        return int(np.sum(self.z == 1))

    @property
    def observed(self) -> np.ndarray:
        return self.o == 1

    @property
    def records(self) -> Tuple[PatientRecord, ...]:
        return tuple(self)

    def __iter__(self) -> Iterator[PatientRecord]:
        for y, s, z, o in zip(self.y, self.s, self.z, self.o):
            yield PatientRecord(y=float(y), s=float(s) if o else None, z=int(z), o=int(o))

    def take(self, indices: np.ndarray) -> "TrialData":
        indices = np.asarray(indices, dtype=np.intp)
        return TrialData(
            y=_readonly(self.y[indices]),
            s=_readonly(self.s[indices]),
            z=_readonly(self.z[indices]),
            o=_readonly(self.o[indices]),
        )

    def arm_indices(self, z: int) -> np.ndarray:
        return np.flatnonzero(self.z == z)

    def observed_in_arm(self, z: int) -> np.ndarray:
        return np.flatnonzero((self.z == z) & (self.o == 1))


@dataclass(frozen=True)
class EstimandSet:
    delta: float
    delta_s: float
    r_s: float

    def to_dict(self):
        return asdict(self)
