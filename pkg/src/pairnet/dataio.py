"""Time-series ingestion and sliding-window dataset construction.

Reads FRED-style CSV exports (a date column plus a value column, with
missing entries left blank or marked non-numerically), turns an ordered
series into n-lag windowed samples, and carves chronological train/test
splits. A seeded synthetic generator stands in for the external rate
series so everything runs offline.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from datetime import date, timedelta

import numpy as np

from .errors import DataError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TimeSeries:
    """Strictly date-ordered observations."""

    dates: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "dates", tuple(self.dates))
        if len(self.dates) != values.shape[0]:
            raise DataError("dates and values must align")
        if not np.isfinite(values).all():
            raise DataError("series values must be finite")
        if any(a >= b for a, b in zip(self.dates, self.dates[1:])):
            raise DataError("dates must be strictly increasing")

    def __len__(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class WindowedDataset:
    """Sliding windows: each sample maps n consecutive values to the next one."""

    n: int
    X: np.ndarray
    y: np.ndarray

    @property
    def input_range(self) -> tuple[float, float]:
        return float(self.X.min()), float(self.X.max())

    def __len__(self) -> int:
        return self.y.shape[0]

    def head(self, count: int) -> "WindowedDataset":
        return WindowedDataset(self.n, self.X[:count], self.y[:count])

    def slice(self, start: int, stop: int) -> "WindowedDataset":
        return WindowedDataset(self.n, self.X[start:stop], self.y[start:stop])


@dataclass(frozen=True)
class SplitPlan:
    """Chronological split sizes: train prefix plus test-prefix lengths."""

    train_count: int
    test_counts: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "test_counts", tuple(self.test_counts))
        if self.train_count < 1 or not self.test_counts:
            raise DataError("split needs a train count and at least one test count")
        if any(c < 1 for c in self.test_counts):
            raise DataError("test counts must be positive")

    @property
    def max_test(self) -> int:
        return max(self.test_counts)


def parse_csv(path, value_column: str = "VALUE", date_column: str = "DATE") -> TimeSeries:
    """Load a date/value CSV, skipping unusable rows and sorting by date.

    Rows whose value is missing or non-numeric (and rows whose date does
    not parse as ISO-8601) are skipped with a logged count. Duplicate
    dates are an error: there is no principled way to pick one.
    """
    rows = []
    skipped = 0
    try:
        with open(path, newline="", encoding="utf-8") as handle:
            reader = csv.DictReader(handle)
            if reader.fieldnames is None or value_column not in reader.fieldnames:
                raise DataError(f"{path}: missing value column {value_column!r}")
            if date_column not in reader.fieldnames:
                raise DataError(f"{path}: missing date column {date_column!r}")
            for record in reader:
                raw_date = (record.get(date_column) or "").strip()
                raw_value = (record.get(value_column) or "").strip()
                try:
                    day = date.fromisoformat(raw_date)
                    value = float(raw_value)
                except ValueError:
                    skipped += 1
                    continue
                if not np.isfinite(value):
                    skipped += 1
                    continue
                rows.append((day.isoformat(), value))
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc

    if skipped:
        logger.info("%s: skipped %d rows without a usable date/value", path, skipped)
    if not rows:
        raise DataError(f"{path}: no usable rows")
    rows.sort(key=lambda item: item[0])
    for (a, _), (b, _) in zip(rows, rows[1:]):
        if a == b:
            raise DataError(f"{path}: duplicate date {a}")
    return TimeSeries(tuple(r[0] for r in rows), np.array([r[1] for r in rows]))


def dump_csv(series: TimeSeries, path, value_column: str = "VALUE", date_column: str = "DATE") -> None:
    """Write the normalized series back out, for provenance."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow([date_column, value_column])
        for day, value in zip(series.dates, series.values):
            writer.writerow([day, repr(float(value))])  # shortest round-trip decimal


def window(series: TimeSeries, n: int) -> WindowedDataset:
    """n-lag sliding windows: sample i is (values[i:i+n], values[i+n])."""
    if n < 1:
        raise DataError("window length must be >= 1")
    if len(series) <= n:
        raise DataError(f"series of length {len(series)} is too short for {n}-lag windows")
    values = series.values
    count = len(series) - n
    X = np.column_stack([values[offset : offset + count] for offset in range(n)])
    return WindowedDataset(n, X, values[n:].copy())


def split(ds: WindowedDataset, plan: SplitPlan) -> tuple[WindowedDataset, WindowedDataset]:
    """Chronological (train, stream) split; the stream holds max(test_counts) samples."""
    needed = plan.train_count + plan.max_test
    if needed > len(ds):
        raise DataError(
            f"plan needs {needed} samples ({plan.train_count} train + {plan.max_test} test), "
            f"dataset has {len(ds)}"
        )
    train = ds.head(plan.train_count)
    stream = ds.slice(plan.train_count, needed)
    return train, stream


def synth_series(kind: str, length: int, seed: int, params: dict | None = None) -> TimeSeries:
    """Deterministic synthetic series for offline runs.

    ar1: mean-reverting process value[t+1] = mu + phi*(value[t] - mu) + sigma*noise.
    sine_plus_noise: mean + amplitude * sin(2 pi t / period) + noise * gaussian.
    """
    if length < 1:
        raise DataError("length must be positive")
    params = dict(params or {})
    rng = np.random.default_rng(seed)
    if kind == "ar1":
        phi = float(params.pop("phi", 0.99))
        mu = float(params.pop("mu", 5.0))
        sigma = float(params.pop("sigma", 0.1))
        start = float(params.pop("start", mu))
        values = np.empty(length)
        values[0] = start
        shocks = rng.normal(size=length - 1) if length > 1 else np.empty(0)
        for t in range(1, length):
            values[t] = mu + phi * (values[t - 1] - mu) + sigma * shocks[t - 1]
    elif kind == "sine_plus_noise":
        amplitude = float(params.pop("amplitude", 1.0))
        period = float(params.pop("period", 50.0))
        mean = float(params.pop("mean", 0.0))
        noise = float(params.pop("noise", 0.1))
        t = np.arange(length)
        values = mean + amplitude * np.sin(2 * np.pi * t / period)
        if noise > 0:
            values = values + noise * rng.normal(size=length)
    else:
        raise DataError(f"unknown synthetic series kind {kind!r}")
    if params:
        raise DataError(f"unknown parameters for {kind!r}: {sorted(params)}")

    first_day = date(1954, 7, 1)
    dates = tuple((first_day + timedelta(days=t)).isoformat() for t in range(length))
    return TimeSeries(dates, values)
