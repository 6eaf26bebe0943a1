"""Dataset ingestion: M4-style paired train/test CSVs and simple row CSVs.

Values are shifted on load so that every series has minimum at least 10 (the
shift constant is recorded per series for inverse-shifting reports); metrics
are computed in the shifted scale, which leaves already-compliant data
untouched.
"""

import csv
from dataclasses import dataclass, field

import numpy as np

from .convolution import TimeSeries

__all__ = [
    "M4_HORIZONS",
    "LoadResult",
    "load_dataset",
    "load_m4",
    "load_simple_csv",
    "shift_values",
]

M4_HORIZONS = {
    "Hourly": 48,
    "Daily": 14,
    "Weekly": 13,
    "Monthly": 18,
    "Quarterly": 8,
    "Yearly": 6,
}

MIN_VALUE = 10.0


@dataclass
class LoadResult:
    series: list = field(default_factory=list)
    truths: dict = field(default_factory=dict)   # id -> shifted ground-truth horizon
    errors: list = field(default_factory=list)   # (row_id, reason)


def shift_values(values: np.ndarray) -> tuple[np.ndarray, float]:
    """Shift a series up so its minimum is at least 10; returns (values, shift)."""
    lo = values.min()
    shift = max(0.0, MIN_VALUE - lo)
    return values + shift, float(shift)


def _parse_rows(path):
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            cells = [c.strip().strip('"') for c in row]
            cells = [c for c in cells if c != ""]
            if not cells:
                continue
            yield cells


def _looks_like_header(cells) -> bool:
    if len(cells) < 2:
        return False
    try:
        float(cells[1])
        return False
    except ValueError:
        return True


def _read_value_rows(path, errors):
    rows = {}
    order = []
    for i, cells in enumerate(_parse_rows(path)):
        if i == 0 and _looks_like_header(cells):
            continue
        sid = cells[0]
        try:
            values = np.array([float(c) for c in cells[1:]], dtype=float)
        except ValueError as exc:
            errors.append((sid, f"malformed row: {exc}"))
            continue
        if values.size == 0:
            errors.append((sid, "row has no values"))
            continue
        if not np.all(np.isfinite(values)):
            errors.append((sid, "row contains non-finite values"))
            continue
        rows[sid] = values
        order.append(sid)
    return rows, order


def load_m4(train_path, test_path=None, category: str | None = None,
            horizon: int | None = None) -> LoadResult:
    """Load M4-format data: ``id,v1,v2,...`` rows, horizons by category.

    The paired test file holds the ``h`` ground-truth values per id. Series
    too short to forecast (``l <= h``) are skipped with a reason.
    """
    if horizon is None:
        if category is None or category not in M4_HORIZONS:
            raise ValueError(f"unknown category {category!r}; pass a horizon explicitly")
        horizon = M4_HORIZONS[category]
    result = LoadResult()
    rows, order = _read_value_rows(train_path, result.errors)
    truths = {}
    if test_path is not None:
        truths, _ = _read_value_rows(test_path, result.errors)
    for sid in order:
        values = rows[sid]
        if values.size <= horizon:
            result.errors.append((sid, f"series too short: l={values.size} <= h={horizon}"))
            continue
        shifted, shift = shift_values(values)
        result.series.append(TimeSeries(
            id=sid, values=shifted, horizon=horizon,
            frequency_label=category, shift=shift,
        ))
        if sid in truths:
            truth = truths[sid]
            if truth.size < horizon:
                result.errors.append((sid, f"truth shorter than horizon: {truth.size}"))
            else:
                result.truths[sid] = truth[:horizon] + shift
    return result


def load_simple_csv(path, horizon: int) -> LoadResult:
    """Load one-series-per-row CSVs with the horizon given by the caller."""
    result = LoadResult()
    rows, order = _read_value_rows(path, result.errors)
    for sid in order:
        values = rows[sid]
        if values.size <= horizon:
            result.errors.append((sid, f"series too short: l={values.size} <= h={horizon}"))
            continue
        shifted, shift = shift_values(values)
        result.series.append(TimeSeries(id=sid, values=shifted, horizon=horizon, shift=shift))
    return result


def load_dataset(path, fmt: str = "simple_csv", horizon: int | None = None,
                 test_path=None, category: str | None = None) -> LoadResult:
    """Dispatch to the format-specific loader."""
    if fmt in ("m4", "M4"):
        return load_m4(path, test_path=test_path, category=category, horizon=horizon)
    if fmt in ("simple", "simple_csv"):
        if horizon is None:
            raise ValueError("simple_csv format requires an explicit horizon")
        return load_simple_csv(path, horizon)
    raise ValueError(f"unknown dataset format {fmt!r}")
