"""Time-series containers, standardization, split protocol, and window construction."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from .errors import (
    ConstantSeriesError,
    EmptyInputError,
    NonFiniteError,
    TooFewRowsError,
    TooShortError,
)

logger = logging.getLogger(__name__)

# Split protocol: datasets below SMALL_ROWS use a 90:10 train/test ratio,
# datasets above TRIM_ROWS are trimmed to their first TRIM_ROWS rows, and
# everything else (including exactly 500..10000 rows) uses 80:20.
SMALL_ROWS = 500
TRIM_ROWS = 10_000
SMALL_TRAIN_FRACTION = 0.9
LARGE_TRAIN_FRACTION = 0.8
MIN_SPLIT_ROWS = 10


def _as_values(values: Sequence[float] | np.ndarray) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64).reshape(-1)
    return arr


@dataclass(frozen=True)
class TimeSeries:
    """A uniformly sampled, single-channel, real-valued sequence.

    Values are stored as a read-only float64 array and must be finite;
    ingestion (see :func:`read_csv_dataset`) drops non-finite rows before
    constructing series.
    """

    values: np.ndarray
    name: str = ""
    channel_id: int = 0

    def __post_init__(self) -> None:
        arr = _as_values(self.values)
        if arr.size and not np.isfinite(arr).all():
            raise NonFiniteError(
                f"series {self.name!r} contains NaN or infinite values"
            )
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return int(self.values.size)

    def with_values(self, values: np.ndarray) -> "TimeSeries":
        """Same label/channel, new values."""
        return TimeSeries(values=values, name=self.name, channel_id=self.channel_id)


@dataclass(frozen=True)
class ScalerParams:
    """Mean and population standard deviation used for standardization."""

    mean: float
    std: float

    def __post_init__(self) -> None:
        if not np.isfinite(self.mean) or not np.isfinite(self.std):
            raise NonFiniteError("scaler parameters must be finite")
        if self.std <= 0:
            raise ConstantSeriesError("scaler std must be positive")


def fit_scaler(train: TimeSeries) -> ScalerParams:
    """Fit standardization parameters on the train partition only.

    Uses the population standard deviation (divisor N). Raises
    ``TooShortError`` for series shorter than 2 and ``ConstantSeriesError``
    for zero-variance series.
    """
    if len(train) < 2:
        raise TooShortError("need at least 2 samples to fit a scaler")
    mean = float(train.values.mean())
    std = float(train.values.std())
    if std == 0.0:
        raise ConstantSeriesError(
            f"series {train.name!r} is constant; cannot standardize"
        )
    return ScalerParams(mean=mean, std=std)


def apply_scaler(
    series: TimeSeries, params: ScalerParams, direction: str = "forward"
) -> TimeSeries:
    """Standardize (``forward``) or de-standardize (``inverse``) a series."""
    if direction == "forward":
        out = (series.values - params.mean) / params.std
    elif direction == "inverse":
        out = series.values * params.std + params.mean
    else:
        raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")
    return series.with_values(out)


@dataclass(frozen=True)
class SplitSpec:
    """Train fraction and optional row cap derived from the split protocol."""

    train_fraction: float
    trim_limit: int | None = None


def split_spec_for(row_count: int) -> SplitSpec:
    """Split rule for a dataset of ``row_count`` rows."""
    if row_count < SMALL_ROWS:
        return SplitSpec(train_fraction=SMALL_TRAIN_FRACTION)
    if row_count > TRIM_ROWS:
        return SplitSpec(train_fraction=LARGE_TRAIN_FRACTION, trim_limit=TRIM_ROWS)
    return SplitSpec(train_fraction=LARGE_TRAIN_FRACTION)


class SplitResult(NamedTuple):
    train_rows: int
    test_rows: int
    trimmed: bool


def split_dataset(row_count: int) -> SplitResult:
    """Partition ``row_count`` rows into train/test counts.

    Datasets under 500 rows split 90:10; datasets over 10000 rows are
    trimmed to the first 10000 and split 80:20; everything in between
    splits 80:20. ``train_rows`` is ``floor(fraction * effective_rows)``.
    """
    if row_count < MIN_SPLIT_ROWS:
        raise TooFewRowsError(
            f"need at least {MIN_SPLIT_ROWS} rows to split, got {row_count}"
        )
    spec = split_spec_for(row_count)
    effective = row_count if spec.trim_limit is None else min(row_count, spec.trim_limit)
    train_rows = int(np.floor(spec.train_fraction * effective))
    test_rows = effective - train_rows
    return SplitResult(train_rows, test_rows, spec.trim_limit is not None)


@dataclass(frozen=True)
class WindowSet:
    """Sliding-window supervision pairs: ``inputs`` (rows x L), ``targets`` (rows x H)."""

    inputs: np.ndarray
    targets: np.ndarray
    lookback: int
    horizon: int

    @property
    def n_rows(self) -> int:
        return int(self.inputs.shape[0])


def make_windows(
    series: TimeSeries | np.ndarray, lookback: int, horizon: int
) -> WindowSet:
    """All unit-stride (lookback, horizon) pairs, ordered by start index.

    Window ``i`` covers indices ``[i, i+L)`` and its target ``[i+L, i+L+H)``.
    """
    if lookback < 1 or horizon < 1:
        raise ValueError("lookback and horizon must be >= 1")
    values = series.values if isinstance(series, TimeSeries) else _as_values(series)
    n = values.size
    if n < lookback + horizon:
        raise TooShortError(
            f"series of length {n} is too short for lookback {lookback} "
            f"+ horizon {horizon}"
        )
    windows = np.lib.stride_tricks.sliding_window_view(values, lookback + horizon)
    inputs = windows[:, :lookback].copy()
    targets = windows[:, lookback:].copy()
    return WindowSet(inputs=inputs, targets=targets, lookback=lookback, horizon=horizon)


@dataclass(frozen=True)
class CsvDataset:
    """Feature columns of one CSV file, plus the timestamp column for alignment."""

    timestamps: tuple[str, ...]
    series: tuple[TimeSeries, ...]
    dropped_rows: int

    @property
    def n_rows(self) -> int:
        return len(self.timestamps)

    def column_names(self) -> list[str]:
        return [s.name for s in self.series]

    def select(self, columns: Sequence[str]) -> "CsvDataset":
        """Restrict to the named feature columns, keeping their order."""
        by_name = {s.name: s for s in self.series}
        missing = [c for c in columns if c not in by_name]
        if missing:
            raise KeyError(
                f"columns {missing} not in dataset; available: {list(by_name)}"
            )
        selected = tuple(
            TimeSeries(values=by_name[c].values, name=c, channel_id=i)
            for i, c in enumerate(columns)
        )
        return CsvDataset(
            timestamps=self.timestamps, series=selected, dropped_rows=self.dropped_rows
        )


def read_csv_dataset(path: str | Path) -> CsvDataset:
    """Read a headed CSV: first column is the timestamp, the rest are features.

    The timestamp column is kept verbatim for output alignment and ignored
    for modeling. Rows containing any value that does not parse as a finite
    float are dropped, and the dropped count is logged.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyInputError(f"{path} is empty") from None
        if len(header) < 2:
            raise EmptyInputError(
                f"{path} needs a timestamp column plus at least one feature column"
            )
        feature_names = [h.strip() for h in header[1:]]
        timestamps: list[str] = []
        rows: list[list[float]] = []
        dropped = 0
        for raw in reader:
            if not raw:
                continue
            if len(raw) != len(header):
                dropped += 1
                continue
            try:
                values = [float(v) for v in raw[1:]]
            except ValueError:
                dropped += 1
                continue
            if not all(np.isfinite(v) for v in values):
                dropped += 1
                continue
            timestamps.append(raw[0])
            rows.append(values)
    if not rows:
        raise EmptyInputError(f"{path} has no usable data rows")
    if dropped:
        logger.info("dropped %d non-finite/malformed rows from %s", dropped, path)
    matrix = np.asarray(rows, dtype=np.float64)
    series = tuple(
        TimeSeries(values=matrix[:, j], name=name, channel_id=j)
        for j, name in enumerate(feature_names)
    )
    return CsvDataset(timestamps=tuple(timestamps), series=series, dropped_rows=dropped)
