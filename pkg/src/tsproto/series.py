"""Core series types, UCR TSV ingestion, and z-normalization."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "TimeSeries",
    "LabeledDataset",
    "z_normalize",
    "load_ucr_tsv",
    "save_ucr_tsv",
    "merge_train_test",
]

# Series with a population standard deviation below this are treated as
# constant and normalize to all zeros.
CONSTANT_STD_THRESHOLD = 1e-12

_LABEL_INT_TOLERANCE = 1e-9


def _as_float_array(values: Iterable[float]) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        arr = np.atleast_1d(np.squeeze(arr))
    if arr.ndim != 1:
        raise ValueError(f"time series must be one-dimensional, got shape {arr.shape}")
    return arr


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """An ordered sequence of finite real samples.

    Instances are immutable; the backing array is made read-only so a
    series can be shared freely across workers.
    """

    values: np.ndarray

    def __post_init__(self) -> None:
        arr = _as_float_array(self.values)
        if arr.size < 1:
            raise ValueError("time series must contain at least one sample")
        if not np.isfinite(arr).all():
            raise ValueError("time series contains non-finite values (NaN or infinity)")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return int(self.values.shape[0])

    @property
    def length(self) -> int:
        return len(self)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"TimeSeries(length={len(self)})"


def as_values(x: "TimeSeries | Sequence[float] | np.ndarray") -> np.ndarray:
    """Return the validated float64 sample array behind ``x``.

    Accepts a :class:`TimeSeries` or any 1-D array-like of finite reals.
    """
    if isinstance(x, TimeSeries):
        return x.values
    arr = _as_float_array(x)
    if arr.size < 1:
        raise ValueError("time series must contain at least one sample")
    if not np.isfinite(arr).all():
        raise ValueError("time series contains non-finite values (NaN or infinity)")
    return arr


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """A named collection of time series with integer class labels.

    ``label_names`` keeps the original label tokens (as read from disk)
    keyed to the stored integers; downstream code only ever needs the
    integers.
    """

    name: str
    series: tuple[TimeSeries, ...]
    labels: np.ndarray
    label_names: dict[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        series = tuple(self.series)
        if len(series) < 1:
            raise ValueError("dataset must contain at least one series")
        labels = np.asarray(self.labels, dtype=np.int64).copy()
        if labels.ndim != 1 or labels.shape[0] != len(series):
            raise ValueError(
                f"series/labels count mismatch: {len(series)} series, {labels.shape[0]} labels"
            )
        labels.setflags(write=False)
        object.__setattr__(self, "series", series)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return len(self.series)

    @property
    def equal_length(self) -> bool:
        lengths = {len(s) for s in self.series}
        return len(lengths) == 1

    @property
    def n_classes(self) -> int:
        return int(np.unique(self.labels).size)

    def lengths(self) -> np.ndarray:
        return np.array([len(s) for s in self.series], dtype=np.int64)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"LabeledDataset({self.name!r}, n={self.n}, classes={self.n_classes})"


def z_normalize(x: "TimeSeries | Sequence[float] | np.ndarray") -> TimeSeries:
    """Rescale a series to zero mean and unit population standard deviation.

    Constant series (population std below ``CONSTANT_STD_THRESHOLD``) map to
    the all-zero series of the same length instead of raising.
    """
    values = as_values(x)
    mean = values.mean()
    std = values.std()  # population std, ddof=0
    if std < CONSTANT_STD_THRESHOLD:
        return TimeSeries(np.zeros_like(values))
    return TimeSeries((values - mean) / std)


def z_normalize_dataset(dataset: LabeledDataset) -> LabeledDataset:
    """Apply :func:`z_normalize` to every series of a dataset."""
    return LabeledDataset(
        name=dataset.name,
        series=tuple(z_normalize(s) for s in dataset.series),
        labels=dataset.labels,
        label_names=dict(dataset.label_names),
    )


def _parse_label(token: str, line_no: int) -> int:
    try:
        value = float(token)
    except ValueError as exc:
        raise ValueError(f"line {line_no}: non-numeric label {token!r}") from exc
    if not np.isfinite(value):
        raise ValueError(f"line {line_no}: non-finite label {token!r}")
    rounded = round(value)
    if abs(value - rounded) > _LABEL_INT_TOLERANCE:
        raise ValueError(f"line {line_no}: label {token!r} is not an integer")
    return int(rounded)


def _parse_sample(token: str, line_no: int, col: int) -> float:
    try:
        value = float(token)
    except ValueError as exc:
        raise ValueError(f"line {line_no}: non-numeric field {token!r} (column {col})") from exc
    if not np.isfinite(value):
        raise ValueError(f"line {line_no}: missing or non-finite sample {token!r} (column {col})")
    return value


def load_ucr_tsv(path: "str | Path", name: str | None = None) -> LabeledDataset:
    """Load a UCR-format TSV file: one record per line, label first.

    Fields are tab-separated; field 0 is the class label, the rest are the
    samples in time order. Trailing blank lines are ignored. Missing-value
    tokens such as ``NaN`` are rejected with the offending line number.
    """
    path = Path(path)
    if name is None:
        name = path.stem
        for suffix in ("_TRAIN", "_TEST"):
            if name.endswith(suffix):
                name = name[: -len(suffix)]
    try:
        text = path.read_text()
    except OSError as exc:
        raise ValueError(f"cannot read {path}: {exc}") from exc

    series: list[TimeSeries] = []
    labels: list[int] = []
    label_names: dict[str, int] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        fields = line.split("\t")
        label = _parse_label(fields[0], line_no)
        if len(fields) < 2:
            raise ValueError(f"line {line_no}: record has zero samples")
        samples = [_parse_sample(tok, line_no, col) for col, tok in enumerate(fields[1:], start=1)]
        series.append(TimeSeries(np.array(samples)))
        labels.append(label)
        label_names.setdefault(fields[0], label)

    if not series:
        raise ValueError(f"{path}: no records")
    return LabeledDataset(name=name, series=tuple(series), labels=np.array(labels), label_names=label_names)


def save_ucr_tsv(dataset: LabeledDataset, path: "str | Path") -> None:
    """Write a dataset back to UCR TSV format.

    Values are written with shortest round-trip precision so that
    ``load_ucr_tsv(save_ucr_tsv(d))`` reproduces the samples exactly.
    """
    path = Path(path)
    lines = []
    for ts, label in zip(dataset.series, dataset.labels):
        fields = [str(int(label))] + [repr(float(v)) for v in ts.values]
        lines.append("\t".join(fields))
    path.write_text("\n".join(lines) + "\n")


def merge_train_test(train: LabeledDataset, test: LabeledDataset) -> LabeledDataset:
    """Concatenate a train and test split, train records first.

    A label-alphabet mismatch between the two splits is reported as a
    warning, not an error.
    """
    train_alphabet = set(np.unique(train.labels).tolist())
    test_alphabet = set(np.unique(test.labels).tolist())
    if train_alphabet != test_alphabet:
        warnings.warn(
            f"label alphabets differ between splits of {train.name!r}: "
            f"train={sorted(train_alphabet)}, test={sorted(test_alphabet)}",
            stacklevel=2,
        )
    label_names = dict(train.label_names)
    for key, value in test.label_names.items():
        label_names.setdefault(key, value)
    return LabeledDataset(
        name=train.name,
        series=train.series + test.series,
        labels=np.concatenate([train.labels, test.labels]),
        label_names=label_names,
    )
