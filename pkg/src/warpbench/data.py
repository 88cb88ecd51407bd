"""Dataset ingestion, normalization and resampling.

Canonical in-memory representation used by every other module: a time
series is an (L, M) float64 array (L timestamps, M channels), a dataset
is a list of such series plus optional labels.  Values are immutable
after construction so series can be shared freely between threads.
"""

from __future__ import annotations

import os
import warnings
from dataclasses import dataclass

import numpy as np

__all__ = [
    "TimeSeries",
    "Dataset",
    "MinMaxScaler",
    "ParseError",
    "load_ucr_dataset",
    "load_multivariate_dataset",
    "save_dataset",
    "read_series",
    "save_series",
    "znormalize",
    "minmax_fit_transform",
    "resample_linear",
]


class ParseError(ValueError):
    """Raised when an input file cannot be parsed into a dataset."""


def _as_values(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise ValueError(f"series values must be 1-D or 2-D, got ndim={arr.ndim}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"series must have L >= 1 and M >= 1, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("series values must be finite (no NaN/Inf)")
    return arr


@dataclass(frozen=True)
class TimeSeries:
    """A multivariate series of L timestamps and M channels.

    ``values`` has shape (L, M) and is stored read-only; univariate input
    (1-D) is promoted to a single channel.
    """

    values: np.ndarray

    def __post_init__(self):
        arr = _as_values(self.values)
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @property
    def length(self) -> int:
        return self.values.shape[0]

    @property
    def channels(self) -> int:
        return self.values.shape[1]

    def channel(self, m: int) -> np.ndarray:
        return self.values[:, m]


@dataclass
class Dataset:
    """A collection of series sharing a channel count, with optional labels.

    Labels may be integer classes or real-valued scores; when present they
    must align one-to-one with ``samples``.  Lengths may differ between
    samples until resampling.
    """

    samples: list[TimeSeries]
    labels: np.ndarray | None = None
    name: str = ""

    def __post_init__(self):
        if not self.samples:
            raise ValueError("dataset must contain at least one sample")
        channels = {s.channels for s in self.samples}
        if len(channels) != 1:
            raise ValueError(f"all samples must share a channel count, got {sorted(channels)}")
        if self.labels is not None:
            self.labels = np.asarray(self.labels)
            if len(self.labels) != len(self.samples):
                raise ValueError(
                    f"labels length {len(self.labels)} != sample count {len(self.samples)}"
                )

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def channels(self) -> int:
        return self.samples[0].channels


@dataclass(frozen=True)
class MinMaxScaler:
    """Per-channel min/max fitted on a dataset, reusable on held-out data."""

    minimum: np.ndarray
    maximum: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.minimum, dtype=np.float64)
        hi = np.asarray(self.maximum, dtype=np.float64)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError("minimum/maximum must be matching 1-D arrays")
        if np.any(hi < lo):
            raise ValueError("per-channel maximum must be >= minimum")
        object.__setattr__(self, "minimum", lo)
        object.__setattr__(self, "maximum", hi)

    def transform(self, dataset: Dataset) -> Dataset:
        """Rescale every channel with the fitted min/max.

        Held-out values outside the fitted range map outside [0, 1]; a
        constant fitted channel maps to 0.0.
        """
        span = self.maximum - self.minimum
        safe = np.where(span == 0.0, 1.0, span)
        out = []
        for s in dataset.samples:
            if s.channels != len(self.minimum):
                raise ValueError("channel count does not match fitted scaler")
            scaled = (s.values - self.minimum) / safe
            scaled[:, span == 0.0] = 0.0
            out.append(TimeSeries(scaled))
        return Dataset(out, labels=dataset.labels, name=dataset.name)


def _detect_separator(line: str) -> str:
    return "\t" if "\t" in line else ","


def _parse_number(cell: str, path: str, lineno: int) -> float:
    try:
        return float(cell)
    except ValueError:
        raise ParseError(f"{path}:{lineno}: non-numeric cell {cell!r}") from None


def load_ucr_dataset(path: str, name: str | None = None) -> Dataset:
    """Read a UCR-style delimited file: one sample per line, label first.

    The separator (tab or comma) is auto-detected from the first line.
    All rows must carry the same number of values; integral labels are
    returned as ints, anything else as floats.
    """
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    rows = [(i + 1, ln) for i, ln in enumerate(lines) if ln.strip()]
    if not rows:
        raise ParseError(f"{path}: empty dataset")
    sep = _detect_separator(rows[0][1])
    labels: list[float] = []
    samples: list[TimeSeries] = []
    width = None
    for lineno, ln in rows:
        cells = [c for c in ln.split(sep) if c.strip() != ""]
        if len(cells) < 2:
            raise ParseError(f"{path}:{lineno}: expected a label and at least one value")
        if width is None:
            width = len(cells)
        elif len(cells) != width:
            raise ParseError(
                f"{path}:{lineno}: ragged row, expected {width - 1} values, got {len(cells) - 1}"
            )
        values = [_parse_number(c, path, lineno) for c in cells]
        labels.append(values[0])
        samples.append(TimeSeries(np.array(values[1:], dtype=np.float64)))
    label_arr = np.array(labels)
    if np.all(label_arr == np.round(label_arr)):
        label_arr = label_arr.astype(np.int64)
    return Dataset(samples, labels=label_arr, name=name or os.path.basename(path))


def load_multivariate_dataset(directory: str, name: str | None = None) -> Dataset:
    """Read one directory holding one UCR-style file per channel.

    Files are taken in sorted order; row i of every file is channel data
    for sample i and labels must agree across files.
    """
    files = sorted(
        os.path.join(directory, f)
        for f in os.listdir(directory)
        if not f.startswith(".") and os.path.isfile(os.path.join(directory, f))
    )
    if not files:
        raise ParseError(f"{directory}: no channel files found")
    per_channel = [load_ucr_dataset(f) for f in files]
    first = per_channel[0]
    for ds, f in zip(per_channel[1:], files[1:]):
        if len(ds) != len(first):
            raise ParseError(f"{f}: sample count differs from first channel file")
        if not np.array_equal(ds.labels, first.labels):
            raise ParseError(f"{f}: labels differ from first channel file")
    samples = []
    for i in range(len(first)):
        chans = [ds.samples[i].values[:, 0] for ds in per_channel]
        lengths = {len(c) for c in chans}
        if len(lengths) != 1:
            raise ParseError(f"{directory}: sample {i} has unequal channel lengths")
        samples.append(TimeSeries(np.stack(chans, axis=1)))
    return Dataset(samples, labels=first.labels, name=name or os.path.basename(directory))


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def save_dataset(dataset: Dataset, path: str, sep: str = "\t") -> None:
    """Write a univariate dataset in UCR layout with 17 significant digits."""
    if dataset.channels != 1:
        raise ValueError("UCR layout is univariate; use one file per channel instead")
    labels = dataset.labels
    if labels is None:
        labels = np.zeros(len(dataset), dtype=np.int64)
    with open(path, "w") as fh:
        for lab, s in zip(labels, dataset.samples):
            lab_str = str(int(lab)) if float(lab) == int(lab) else _fmt(lab)
            fh.write(sep.join([lab_str] + [_fmt(v) for v in s.values[:, 0]]) + "\n")


def read_series(path: str) -> TimeSeries:
    """Read a single series: L rows of M columns, or one row of values."""
    with open(path) as fh:
        lines = [ln for ln in (l.strip() for l in fh) if ln]
    if not lines:
        raise ParseError(f"{path}: empty series")
    sep = _detect_separator(lines[0])
    rows = []
    for lineno, ln in enumerate(lines, start=1):
        cells = [c for c in ln.replace(sep, " ").split() if c]
        rows.append([_parse_number(c, path, lineno) for c in cells])
    width = {len(r) for r in rows}
    if len(width) != 1:
        raise ParseError(f"{path}: rows have unequal column counts")
    arr = np.array(rows, dtype=np.float64)
    if arr.shape[0] == 1:
        arr = arr.reshape(-1, 1)
    return TimeSeries(arr)


def save_series(series: TimeSeries, path: str, sep: str = "\t") -> None:
    """Write a series as L rows of M columns with 17 significant digits."""
    with open(path, "w") as fh:
        for row in series.values:
            fh.write(sep.join(_fmt(v) for v in row) + "\n")


def znormalize(series: TimeSeries) -> TimeSeries:
    """Rescale each channel to zero mean and unit population stddev.

    Constant channels map to all zeros instead of dividing by zero.
    """
    vals = series.values
    mean = vals.mean(axis=0)
    std = vals.std(axis=0)  # population std (divide by L)
    safe = np.where(std == 0.0, 1.0, std)
    out = (vals - mean) / safe
    out[:, std == 0.0] = 0.0
    return TimeSeries(out)


def minmax_fit_transform(dataset: Dataset) -> tuple[Dataset, MinMaxScaler]:
    """Rescale every channel to [0, 1] with dataset-global per-channel min/max.

    Constant channels are rescaled to 0.0 with a warning.  The fitted
    scaler is returned so held-out data can be transformed consistently
    (values there may fall outside [0, 1]).
    """
    stacked = np.concatenate([s.values for s in dataset.samples], axis=0)
    lo = stacked.min(axis=0)
    hi = stacked.max(axis=0)
    if np.any(hi == lo):
        flat = [int(m) for m in np.nonzero(hi == lo)[0]]
        warnings.warn(f"constant channel(s) {flat} rescaled to 0.0", stacklevel=2)
    scaler = MinMaxScaler(lo, hi)
    return scaler.transform(dataset), scaler


def resample_linear(series: TimeSeries, target_len: int) -> TimeSeries:
    """Linearly interpolate each channel onto ``target_len`` equispaced points.

    Endpoints are preserved exactly.  This deliberately replaces
    Fourier-based resampling; see README.
    """
    if target_len < 2:
        raise ValueError(f"target_len must be >= 2, got {target_len}")
    if series.length < 2:
        raise ValueError("resampling needs a series of length >= 2")
    old = np.arange(series.length, dtype=np.float64)
    new = np.linspace(0.0, series.length - 1.0, target_len)
    out = np.column_stack([np.interp(new, old, series.values[:, m]) for m in range(series.channels)])
    out[0] = series.values[0]
    out[-1] = series.values[-1]
    return TimeSeries(out)
