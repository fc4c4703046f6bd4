"""Multichannel time-series runs.

Covers CSV ingestion, zero-up-crossing analysis, encounter-period
estimation, downsampling, and Z-score normalization.  All types are
immutable after construction and all operations are pure functions.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DataError,
    DegenerateDataError,
    FormatError,
    ParameterError,
    SchemaError,
)

# Relative jitter above which a time column is rejected as non-uniform.
JITTER_TOL = 1e-6


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.asarray(arr, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class TimeSeriesRun:
    """One uniformly sampled multichannel recording.

    ``values`` is ``(n_samples, n_channels)`` with one column per entry of
    ``channels``.  At most one channel is designated as the forcing input;
    the remaining channels are the state.
    """

    id: str
    dt: float
    channels: tuple[str, ...]
    values: np.ndarray
    input_channel: str | None = None

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 2:
            raise ParameterError(f"run {self.id!r}: values must be 2-D")
        if vals.shape[0] < 2:
            raise ParameterError(f"run {self.id!r}: need at least 2 samples")
        channels = tuple(self.channels)
        if len(channels) != vals.shape[1]:
            raise ParameterError(
                f"run {self.id!r}: {len(channels)} channel names for "
                f"{vals.shape[1]} columns"
            )
        if len(set(channels)) != len(channels):
            raise ParameterError(f"run {self.id!r}: duplicate channel names")
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ParameterError(f"run {self.id!r}: dt must be positive")
        if self.input_channel is not None and self.input_channel not in channels:
            raise ParameterError(
                f"run {self.id!r}: input channel {self.input_channel!r} "
                "not among channels"
            )
        object.__setattr__(self, "channels", channels)
        object.__setattr__(self, "values", _freeze(vals))

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def duration(self) -> float:
        """Record length ``n_samples * dt``."""
        return self.n_samples * self.dt

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_samples) * self.dt

    @property
    def state_channels(self) -> tuple[str, ...]:
        return tuple(c for c in self.channels if c != self.input_channel)

    def channel(self, name: str) -> np.ndarray:
        if name not in self.channels:
            raise SchemaError(f"run {self.id!r} has no channel {name!r}")
        return self.values[:, self.channels.index(name)]

    def state_values(self) -> np.ndarray:
        """(n_samples, n_state) view of the non-input columns."""
        idx = [i for i, c in enumerate(self.channels) if c != self.input_channel]
        return self.values[:, idx]

    def input_values(self) -> np.ndarray:
        """(n_samples, 1) view of the designated forcing column."""
        if self.input_channel is None:
            raise SchemaError(f"run {self.id!r} has no designated input channel")
        return self.values[:, [self.channels.index(self.input_channel)]]

    def window(self, start: int, count: int, suffix: str = "") -> "TimeSeriesRun":
        """Contiguous slice of ``count`` samples starting at ``start``."""
        if start < 0 or count < 2 or start + count > self.n_samples:
            raise ParameterError(
                f"run {self.id!r}: window [{start}, {start + count}) does not "
                f"fit {self.n_samples} samples"
            )
        return TimeSeriesRun(
            id=self.id + suffix,
            dt=self.dt,
            channels=self.channels,
            values=self.values[start:start + count],
            input_channel=self.input_channel,
        )


@dataclass(frozen=True)
class SplitManifest:
    """Assignment of run ids to training / validation / test roles."""

    training: tuple[str, ...]
    validation: tuple[str, ...]
    test: tuple[str, ...]
    sequence_length: float
    sequences_per_run: int = 1

    def __post_init__(self):
        object.__setattr__(self, "training", tuple(self.training))
        object.__setattr__(self, "validation", tuple(self.validation))
        object.__setattr__(self, "test", tuple(self.test))
        groups = (self.training, self.validation, self.test)
        all_ids = [i for g in groups for i in g]
        if len(set(all_ids)) != len(all_ids):
            raise ParameterError("manifest role lists are not disjoint")
        if not (self.sequence_length > 0):
            raise ParameterError("sequence_length must be positive")
        if self.sequences_per_run < 1:
            raise ParameterError("sequences_per_run must be >= 1")

    def check_resolves(self, run_ids) -> None:
        """Raise unless every listed id is among ``run_ids``."""
        known = set(run_ids)
        missing = [i for g in (self.training, self.validation, self.test)
                   for i in g if i not in known]
        if missing:
            raise ParameterError(f"manifest references unknown runs: {missing}")


@dataclass(frozen=True)
class Normalization:
    """Per-channel shift/scale statistics fitted on a training signal."""

    channels: tuple[str, ...]
    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "channels", tuple(self.channels))
        mean = _freeze(np.atleast_1d(self.mean))
        std = _freeze(np.atleast_1d(self.std))
        if mean.shape != (len(self.channels),) or std.shape != mean.shape:
            raise ParameterError("normalization statistics do not match channels")
        if not np.all(std > 0):
            raise DegenerateDataError("normalization requires positive stds")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "std", std)

    @classmethod
    def identity(cls, channels) -> "Normalization":
        n = len(tuple(channels))
        return cls(tuple(channels), np.zeros(n), np.ones(n))

    def _index(self, names) -> np.ndarray:
        try:
            return np.array([self.channels.index(c) for c in names])
        except ValueError as exc:
            raise SchemaError(f"channel not covered by normalization: {exc}")

    def transform(self, values: np.ndarray, names) -> np.ndarray:
        """Z-score the columns of ``values`` labelled by ``names``."""
        idx = self._index(names)
        return (np.asarray(values, dtype=np.float64) - self.mean[idx]) / self.std[idx]

    def inverse(self, values: np.ndarray, names) -> np.ndarray:
        """Undo :meth:`transform` for the columns labelled by ``names``."""
        idx = self._index(names)
        return np.asarray(values, dtype=np.float64) * self.std[idx] + self.mean[idx]


def load_run(path, schema, run_id: str | None = None) -> TimeSeriesRun:
    """Read a run from CSV and designate channel roles.

    The file must have a header ``time,<ch1>,<ch2>,...`` with strictly
    increasing, uniformly spaced times in seconds.  ``schema`` maps channel
    names to the role ``"state"`` or ``"input"``; at most one channel may be
    the input.  Channels absent from the schema are dropped.
    """
    schema = dict(schema)
    bad_roles = {c: r for c, r in schema.items() if r not in ("state", "input")}
    if bad_roles:
        raise SchemaError(f"unknown channel roles: {bad_roles}")
    inputs = [c for c, r in schema.items() if r == "input"]
    if len(inputs) > 1:
        raise SchemaError(f"more than one input channel designated: {inputs}")

    path = str(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError(f"{path}: empty file")
        rows = list(reader)

    header = [h.strip() for h in header]
    if not header or header[0] != "time":
        raise FormatError(f"{path}: first column must be 'time'")
    missing = [c for c in schema if c not in header[1:]]
    if missing:
        raise SchemaError(f"{path}: missing columns {missing}")
    if len(rows) < 2:
        raise FormatError(f"{path}: need at least 2 data rows")

    keep = [(i, name) for i, name in enumerate(header) if i == 0 or name in schema]
    data = np.empty((len(rows), len(keep)))
    for r, row in enumerate(rows):
        if len(row) != len(header):
            raise FormatError(f"{path}: row {r + 2} has {len(row)} fields")
        for c, (i, name) in enumerate(keep):
            try:
                value = float(row[i])
            except ValueError:
                raise DataError(
                    f"{path}: row {r + 2}, column {name!r}: "
                    f"not a number ({row[i]!r})"
                )
            if math.isnan(value):
                raise DataError(f"{path}: row {r + 2}, column {name!r}: NaN")
            data[r, c] = value

    times = data[:, 0]
    diffs = np.diff(times)
    if np.any(diffs <= 0):
        raise FormatError(f"{path}: time column is not strictly increasing")
    dt = (times[-1] - times[0]) / (len(times) - 1)
    if np.max(np.abs(diffs - dt)) > JITTER_TOL * dt:
        raise FormatError(f"{path}: non-uniform sampling (jitter > {JITTER_TOL})")

    channels = tuple(name for _, name in keep[1:])
    return TimeSeriesRun(
        id=run_id if run_id is not None else path,
        dt=float(dt),
        channels=channels,
        values=data[:, 1:],
        input_channel=inputs[0] if inputs else None,
    )


def save_run(run: TimeSeriesRun, path) -> None:
    """Write a run in the CSV format accepted by :func:`load_run`."""
    with open(str(path), "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time", *run.channels])
        times = run.times
        for i in range(run.n_samples):
            writer.writerow([repr(float(times[i])),
                             *(repr(float(v)) for v in run.values[i])])


def zero_up_crossings(signal) -> int:
    """Count upward crossings of the signal mean.

    An index ``i`` counts when ``signal[i] < mean`` and
    ``signal[i+1] >= mean``.  A constant signal has no crossings.
    """
    x = np.asarray(signal, dtype=np.float64)
    if x.ndim != 1 or x.size < 2:
        raise ParameterError("zero_up_crossings needs a 1-D signal of length >= 2")
    mu = x.mean()
    return int(np.count_nonzero((x[:-1] < mu) & (x[1:] >= mu)))


def mean_encounter_period(runs, channel: str) -> float:
    """Average zero-up-crossing period of ``channel`` across ``runs``.

    Each run contributes ``duration / crossings``; the result is the
    arithmetic mean of the per-run periods.
    """
    runs = list(runs)
    if not runs:
        raise ParameterError("mean_encounter_period needs at least one run")
    periods = []
    for run in runs:
        n_up = zero_up_crossings(run.channel(channel))
        if n_up == 0:
            raise DegenerateDataError(
                f"run {run.id!r}: no mean up-crossings in channel {channel!r}"
            )
        periods.append(run.duration / n_up)
    return float(np.mean(periods))


def resample(run: TimeSeriesRun, steps_per_period: int, period: float) -> TimeSeriesRun:
    """Downsample a run to ``steps_per_period`` samples per ``period``.

    Values are linearly interpolated onto the uniform grid
    ``0, dt', 2 dt', ...`` with ``dt' = period / steps_per_period``, kept
    inside the original time span.  Upsampling is rejected.
    """
    if steps_per_period < 2:
        raise ParameterError("steps_per_period must be >= 2")
    if not period > 0:
        raise ParameterError("period must be positive")
    dt_new = period / steps_per_period
    if dt_new < run.dt * (1.0 - 1e-9):
        raise ParameterError(
            f"target dt {dt_new:.6g} is finer than source dt {run.dt:.6g}; "
            "only downsampling is supported"
        )
    span = (run.n_samples - 1) * run.dt
    n_new = int(np.floor(span / dt_new + 1e-9)) + 1
    if n_new < 2:
        raise ParameterError("resampled run would have fewer than 2 samples")
    t_old = run.times
    t_new = np.arange(n_new) * dt_new
    out = np.empty((n_new, len(run.channels)))
    for c in range(len(run.channels)):
        out[:, c] = np.interp(t_new, t_old, run.values[:, c])
    return TimeSeriesRun(
        id=run.id,
        dt=dt_new,
        channels=run.channels,
        values=out,
        input_channel=run.input_channel,
    )


def zscore_fit(run: TimeSeriesRun, channels=None) -> Normalization:
    """Per-channel mean and unbiased standard deviation of a run."""
    names = tuple(channels) if channels is not None else run.channels
    cols = np.stack([run.channel(c) for c in names], axis=1)
    mean = cols.mean(axis=0)
    std = cols.std(axis=0, ddof=1)
    for c, s in zip(names, std):
        if not (s > 0 and math.isfinite(s)):
            raise DegenerateDataError(
                f"run {run.id!r}: channel {c!r} has zero variance"
            )
    return Normalization(names, mean, std)


def _map_channels(run: TimeSeriesRun, norm: Normalization, invert: bool) -> TimeSeriesRun:
    values = np.array(run.values)
    for c in norm.channels:
        if c not in run.channels:
            raise SchemaError(f"run {run.id!r} has no channel {c!r}")
        i = run.channels.index(c)
        col = values[:, [i]]
        values[:, [i]] = norm.inverse(col, [c]) if invert else norm.transform(col, [c])
    return TimeSeriesRun(
        id=run.id,
        dt=run.dt,
        channels=run.channels,
        values=values,
        input_channel=run.input_channel,
    )


def zscore_apply(run: TimeSeriesRun, norm: Normalization) -> TimeSeriesRun:
    """Shift and scale the normalized channels of ``run`` by ``norm``."""
    return _map_channels(run, norm, invert=False)


def zscore_invert(run: TimeSeriesRun, norm: Normalization) -> TimeSeriesRun:
    """Undo :func:`zscore_apply` with the same statistics."""
    return _map_channels(run, norm, invert=True)


def extract_sequences(run: TimeSeriesRun, n_samples: int, count: int):
    """Cut ``count`` consecutive non-overlapping windows from the run start."""
    if count < 1:
        raise ParameterError("count must be >= 1")
    if n_samples * count > run.n_samples:
        raise ParameterError(
            f"run {run.id!r}: cannot extract {count} sequences of "
            f"{n_samples} samples from {run.n_samples}"
        )
    return [run.window(k * n_samples, n_samples, suffix=f"#{k}") for k in range(count)]
