"""Uniformly sampled multichannel time series.

Everything in the package passes :class:`TimeSeries` around: measured vessel
states, wave inputs, model predictions. Data are stored channel-major, i.e.
``data[i, k]`` is channel ``i`` at time ``t0 + k*dt``.
"""
from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np
from scipy.ndimage import uniform_filter1d

from .errors import (
    ConstantChannel,
    DataError,
    MissingChannel,
    NonFiniteValue,
    NonUniformSampling,
    UpsamplingRequested,
    WindowTooLong,
)

UNIFORM_JITTER = 1e-6


def round_half_away(x: float) -> int:
    """Nearest integer, ties away from zero (Python's ``round`` is banker's)."""
    return int(math.copysign(math.floor(abs(x) + 0.5), x))


@dataclass(frozen=True)
class TimeSeries:
    channel_names: tuple[str, ...]
    t0: float
    dt: float
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        names = tuple(str(n) for n in self.channel_names)
        data = np.array(self.data, dtype=float, copy=True)
        if data.ndim == 1:
            data = data[None, :]
        if data.ndim != 2:
            raise DataError(f"data must be 2-D (channels x samples), got shape {data.shape}")
        if data.shape[0] != len(names):
            raise DataError(f"{len(names)} channel names for {data.shape[0]} data rows")
        if len(set(names)) != len(names):
            raise DataError(f"channel names not unique: {names}")
        if not self.dt > 0:
            raise DataError(f"dt must be positive, got {self.dt}")
        if not np.all(np.isfinite(data)):
            ch, k = np.argwhere(~np.isfinite(data))[0]
            raise NonFiniteValue(f"non-finite value in channel {names[ch]!r} at sample {k}")
        data.flags.writeable = False
        object.__setattr__(self, "channel_names", names)
        object.__setattr__(self, "t0", float(self.t0))
        object.__setattr__(self, "dt", float(self.dt))
        object.__setattr__(self, "data", data)

    # basic shape ---------------------------------------------------------
    @property
    def n_channels(self) -> int:
        return self.data.shape[0]

    @property
    def n_samples(self) -> int:
        return self.data.shape[1]

    def __len__(self) -> int:
        return self.n_samples

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n_samples)

    @property
    def duration(self) -> float:
        return self.n_samples * self.dt

    # access --------------------------------------------------------------
    def channel(self, name: str) -> np.ndarray:
        try:
            return self.data[self.channel_names.index(name)]
        except ValueError:
            raise MissingChannel(f"no channel {name!r} in {self.channel_names}") from None

    def select(self, names: Sequence[str]) -> "TimeSeries":
        rows = []
        for n in names:
            if n not in self.channel_names:
                raise MissingChannel(f"no channel {n!r} in {self.channel_names}")
            rows.append(self.channel_names.index(n))
        return TimeSeries(tuple(names), self.t0, self.dt, self.data[rows])

    def window(self, start: int, stop: int) -> "TimeSeries":
        """Samples ``start:stop`` (indices), with ``t0`` shifted accordingly."""
        if not 0 <= start < stop <= self.n_samples:
            raise WindowTooLong(
                f"window [{start}, {stop}) outside series of {self.n_samples} samples")
        return TimeSeries(self.channel_names, self.t0 + start * self.dt, self.dt,
                          self.data[:, start:stop])

    def with_data(self, data: np.ndarray, channel_names: Sequence[str] | None = None,
                  t0: float | None = None) -> "TimeSeries":
        return TimeSeries(tuple(channel_names or self.channel_names),
                          self.t0 if t0 is None else t0, self.dt, data)

    def stack(self, other: "TimeSeries") -> "TimeSeries":
        """Channel-wise concatenation of two aligned series."""
        if other.n_samples != self.n_samples or not math.isclose(other.dt, self.dt):
            raise DataError("cannot stack series with different length or dt")
        return TimeSeries(self.channel_names + other.channel_names, self.t0, self.dt,
                          np.vstack([self.data, other.data]))


# CSV ---------------------------------------------------------------------
def save_csv(ts: TimeSeries, path: str | Path) -> None:
    """Write ``t`` plus one column per channel, 17 significant digits."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("t",) + ts.channel_names)
        t = ts.times
        for k in range(ts.n_samples):
            w.writerow([f"{t[k]:.17g}"] + [f"{v:.17g}" for v in ts.data[:, k]])


def load_csv(path: str | Path, schema: Sequence[str] | None = None) -> TimeSeries:
    """Read a series written by :func:`save_csv` (or any compatible file).

    ``schema`` lists the channels that must be present; they are returned in
    that order. Without a schema every non-time column is returned.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DataError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if not header or header[0] != "t":
        raise MissingChannel(f"{path}: first column must be 't', got {header[:1]}")
    names = list(schema) if schema is not None else header[1:]
    for n in names:
        if n not in header[1:]:
            raise MissingChannel(f"{path}: missing channel column {n!r}")
    cols = [header.index(n) for n in names]

    body = rows[1:]
    if len(body) < 2:
        raise DataError(f"{path}: need at least two samples")
    t = np.empty(len(body))
    data = np.empty((len(names), len(body)))
    for r, row in enumerate(body):
        try:
            t[r] = float(row[0])
            for i, c in enumerate(cols):
                data[i, r] = float(row[c])
        except (ValueError, IndexError) as exc:
            raise DataError(f"{path}: malformed row {r + 2}: {exc}") from None
    bad = np.argwhere(~np.isfinite(data))
    if bad.size:
        i, r = bad[0]
        raise NonFiniteValue(f"{path}: non-finite value in column {names[i]!r}, row {r + 2}")
    if not np.all(np.isfinite(t)):
        raise NonFiniteValue(f"{path}: non-finite time in row {int(np.argmin(np.isfinite(t))) + 2}")

    steps = np.diff(t)
    dt = float(np.median(steps))
    if dt <= 0:
        raise NonUniformSampling(f"{path}: time column is not increasing")
    dev = np.abs(steps - dt) > UNIFORM_JITTER * dt
    if np.any(dev):
        r = int(np.argmax(dev)) + 3
        raise NonUniformSampling(f"{path}: time step at row {r} deviates from dt={dt:g}")
    return TimeSeries(tuple(names), float(t[0]), dt, data)


# standardization -------------------------------------------------------
@dataclass(frozen=True)
class Standardizer:
    """Per-channel z-score parameters estimated on a training window."""

    channel_names: tuple[str, ...]
    mean: np.ndarray
    std: np.ndarray
    fitted_on: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float)
        std = np.asarray(self.std, dtype=float)
        if np.any(std <= 0):
            raise ConstantChannel(
                f"constant channel {self.channel_names[int(np.argmin(std))]!r}")
        object.__setattr__(self, "channel_names", tuple(self.channel_names))
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "std", std)
        object.__setattr__(self, "fitted_on", tuple(float(v) for v in self.fitted_on))

    @classmethod
    def identity(cls, channel_names: Sequence[str]) -> "Standardizer":
        n = len(channel_names)
        return cls(tuple(channel_names), np.zeros(n), np.ones(n))

    @classmethod
    def fit(cls, ts: TimeSeries) -> "Standardizer":
        if ts.n_samples < 2:
            raise DataError("need at least two samples to standardize")
        mean = ts.data.mean(axis=1)
        # second pass removes the rounding left when |mean| >> std
        mean = mean + (ts.data - mean[:, None]).mean(axis=1)
        std = ts.data.std(axis=1, ddof=1)
        flat = np.flatnonzero(std <= 1e-14 * np.maximum(1.0, np.abs(mean)))
        if flat.size:
            raise ConstantChannel(f"channel {ts.channel_names[flat[0]]!r} is constant")
        return cls(ts.channel_names, mean, std,
                   (ts.t0, ts.t0 + (ts.n_samples - 1) * ts.dt))

    def _check(self, ts: TimeSeries) -> None:
        if ts.channel_names != self.channel_names:
            raise MissingChannel(
                f"standardizer channels {self.channel_names} != {ts.channel_names}")

    def apply(self, ts: TimeSeries) -> TimeSeries:
        self._check(ts)
        return ts.with_data((ts.data - self.mean[:, None]) / self.std[:, None])

    def invert(self, ts: TimeSeries) -> TimeSeries:
        self._check(ts)
        return ts.with_data(ts.data * self.std[:, None] + self.mean[:, None])

    def to_dict(self) -> dict:
        return {"channels": list(self.channel_names), "mean": self.mean.tolist(),
                "std": self.std.tolist(), "fitted_on": list(self.fitted_on)}

    @classmethod
    def from_dict(cls, d: dict) -> "Standardizer":
        return cls(tuple(d["channels"]), np.array(d["mean"], dtype=float),
                   np.array(d["std"], dtype=float), tuple(d.get("fitted_on", (0.0, 0.0))))


def standardize(ts: TimeSeries, window: tuple[float, float] | None = None
                ) -> tuple[TimeSeries, Standardizer]:
    """Z-score ``ts`` with statistics taken on ``window`` (times, inclusive).

    The statistics use the sample standard deviation; the whole series is
    transformed, so values outside the window are generally not zero-mean.
    """
    if window is None:
        ref = ts
    else:
        t = ts.times
        tol = 1e-9 * ts.dt
        if window[0] < t[0] - tol or window[1] > t[-1] + tol or window[1] <= window[0]:
            raise WindowTooLong(f"window {window} not inside [{t[0]}, {t[-1]}]")
        idx = np.flatnonzero((t >= window[0] - tol) & (t <= window[1] + tol))
        ref = ts.window(int(idx[0]), int(idx[-1]) + 1)
    st = Standardizer.fit(ref)
    return st.apply(ts), st


# resampling ------------------------------------------------------------
def decimation_factor(dt: float, target_steps_per_period: int, period: float) -> int:
    target_dt = period / target_steps_per_period
    if target_dt < dt * (1 - 1e-9):
        raise UpsamplingRequested(
            f"target dt {target_dt:g} s is finer than the sampling interval {dt:g} s")
    return max(1, round_half_away(target_dt / dt))


def decimate(ts: TimeSeries, target_steps_per_period: int, period: float) -> TimeSeries:
    """Boxcar-filter then keep every ``factor``-th sample.

    The filter width equals the decimation factor and edges are padded with
    the nearest sample. The first output sample sits at ``ts.t0``.
    """
    factor = decimation_factor(ts.dt, target_steps_per_period, period)
    if factor == 1:
        return ts
    smooth = uniform_filter1d(ts.data, size=factor, axis=1, mode="nearest")
    return TimeSeries(ts.channel_names, ts.t0, ts.dt * factor, smooth[:, ::factor])


# train/test windows ----------------------------------------------------
@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.5
    test_window_length: float = 0.0
    test_window_count: int = 1
    rng_seed: int = 0

    def __post_init__(self):
        if not 0 < self.train_fraction <= 1:
            raise DataError(f"train_fraction must be in (0, 1], got {self.train_fraction}")
        if self.test_window_count < 0:
            raise DataError("test_window_count must be non-negative")


def split(ts: TimeSeries, spec: SplitSpec) -> tuple[TimeSeries, list[TimeSeries]]:
    """First ``train_fraction`` of the record for training, random test
    windows from the remainder."""
    n_train = round_half_away(spec.train_fraction * ts.n_samples)
    train = ts.window(0, n_train)
    if spec.test_window_count == 0:
        return train, []
    n_test = ts.n_samples - n_train
    length = round_half_away(spec.test_window_length / ts.dt)
    if length <= 0 or length > n_test:
        raise WindowTooLong(
            f"test window of {length} samples does not fit the {n_test}-sample test region")
    rng = np.random.default_rng(spec.rng_seed)
    starts = rng.integers(0, n_test - length, size=spec.test_window_count, endpoint=True)
    return train, [ts.window(n_train + int(s), n_train + int(s) + length) for s in starts]


class Window(NamedTuple):
    run: int
    start: int
    length: int

    def take(self, series: Sequence[TimeSeries]) -> TimeSeries:
        return series[self.run].window(self.start, self.start + self.length)


def draw_windows(lengths: Sequence[int], length: int, count: int, seed: int,
                 fraction: tuple[float, float] = (0.0, 1.0)) -> list[Window]:
    """Draw ``count`` windows of ``length`` samples from a set of runs.

    Each window picks a run uniformly among those whose region
    ``fraction`` (e.g. ``(0, 0.5)`` for the first half) can hold it, then a
    uniform start inside that region. Windows may overlap.
    """
    regions = []
    for run, n in enumerate(lengths):
        lo = round_half_away(fraction[0] * n)
        hi = round_half_away(fraction[1] * n)
        if hi - lo >= length:
            regions.append((run, lo, hi))
    if not regions:
        raise WindowTooLong(f"no run can hold a window of {length} samples in region {fraction}")
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        run, lo, hi = regions[int(rng.integers(len(regions)))]
        start = int(rng.integers(lo, hi - length, endpoint=True))
        out.append(Window(run, start, length))
    return out


def full_factorial(n_train: int, n_test: int) -> list[tuple[int, int]]:
    """All (train index, test index) pairings, train-major."""
    return list(itertools.product(range(n_train), range(n_test)))
