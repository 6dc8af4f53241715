import logging
from pathlib import Path
from typing import Tuple, Union

import numpy as np
import pandas as pd

from surrogate.exceptions import EmptyArmError, ParseError, ValidationError
from surrogate.models.trial import PatientRecord, TrialData

logger = logging.getLogger(__name__)

COLUMNS = ("y", "s", "z")
MISSING_TOKENS = frozenset({"", "na", "nan"})


def _is_missing(cell: str) -> bool:
    return cell.strip().lower() in MISSING_TOKENS


def _parse_number(cell: str, row: int, column: str) -> float:
    try:
        value = float(cell.strip())
    except ValueError:
        raise ParseError(f"cannot parse {cell!r} as a number", row=row, column=column)
    if not np.isfinite(value):
        raise ParseError(f"non-finite value {cell!r}", row=row, column=column)
    return value


def load_trial_csv(path: Union[str, Path]) -> TrialData:
    """
    Reads a trial from a UTF-8 CSV with a header naming y, s and z.

    Missing surrogates are empty, "NA" or "NaN" cells (any case). Rows are
    numbered from 1 in error messages, header excluded.
    """
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f'input file "{path}" does not exist')

    frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8", skipinitialspace=True)
    frame.columns = [str(c).strip() for c in frame.columns]

    missing_columns = [c for c in COLUMNS if c not in frame.columns]
    if missing_columns:
        raise ValidationError(f"missing required column(s): {', '.join(missing_columns)}")

    extra = [c for c in frame.columns if c not in COLUMNS]
    if extra:
        logger.warning(f"Ignoring extra column(s) in {path.name}: {', '.join(extra)}")

    y, s, z = [], [], []
    for row, (y_cell, s_cell, z_cell) in enumerate(frame[list(COLUMNS)].itertuples(index=False), start=1):
        if _is_missing(y_cell):
            raise ValidationError(f"row {row}: outcome y is missing")
        y.append(_parse_number(y_cell, row, "y"))

        s.append(None if _is_missing(s_cell) else _parse_number(s_cell, row, "s"))

        if _is_missing(z_cell):
            raise ValidationError(f"row {row}: arm z is missing")
        arm = _parse_number(z_cell, row, "z")
        if arm not in (0.0, 1.0):
            raise ValidationError(f"row {row}: arm z must be 0 or 1, got {z_cell!r}")
        z.append(int(arm))

    data = TrialData.from_arrays(y=y, s=s, z=z)
    logger.debug(f"Loaded {len(data)} patients from {path} (n0={data.n0}, n1={data.n1})")
    return data


def write_trial_csv(data: TrialData, path: Union[str, Path]) -> Path:
    path = Path(path)
    frame = pd.DataFrame({
        "y": [repr(float(v)) for v in data.y],
        "s": [repr(float(v)) if o else "" for v, o in zip(data.s, data.o)],
        "z": [str(int(v)) for v in data.z],
    })
    frame.to_csv(path, index=False, encoding="utf-8")
    return path


def complete_cases(data: TrialData) -> TrialData:
    keep = np.flatnonzero(data.o == 1)
    for arm in (0, 1):
        if not np.any(data.z[keep] == arm):
            raise EmptyArmError(f"empty arm {arm} after complete-case filter", arm=arm)
    if keep.size == len(data):
        return data
    return data.take(keep)


def arm_view(data: TrialData, z: int) -> Tuple[PatientRecord, ...]:
    return tuple(record for record in data if record.z == z)


def missing_fraction(data: TrialData) -> Tuple[float, float]:
    return tuple(
        float(1.0 - np.mean(data.o[data.z == arm])) for arm in (0, 1)
    )
