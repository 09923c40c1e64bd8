"""Prediction-quality metrics.

All errors are normalized by ``k`` times the sample standard deviation of the
*reference* channel over the evaluation window (``ddof=1``).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConstantReference, ShapeMismatch
from .timeseries import TimeSeries


def _arrays(pred, ref) -> tuple[np.ndarray, np.ndarray]:
    p = pred.data if isinstance(pred, TimeSeries) else np.atleast_2d(np.asarray(pred, float))
    r = ref.data if isinstance(ref, TimeSeries) else np.atleast_2d(np.asarray(ref, float))
    if p.shape != r.shape:
        raise ShapeMismatch(f"prediction {p.shape} vs reference {r.shape}")
    if r.shape[1] < 2:
        raise ShapeMismatch("need at least two samples")
    return p, r


def _scale(r: np.ndarray, k: float) -> np.ndarray:
    sd = np.std(r, axis=1, ddof=1)
    if np.any(sd == 0):
        raise ConstantReference(f"reference channel(s) {np.flatnonzero(sd == 0).tolist()} "
                                "are constant on the window")
    return k * sd


def nrmse_per_channel(pred, ref, k: float = 1.0) -> np.ndarray:
    p, r = _arrays(pred, ref)
    return np.sqrt(np.mean((p - r) ** 2, axis=1)) / _scale(r, k)


def ammae_per_channel(pred, ref, k: float = 1.0) -> np.ndarray:
    """Half the sum of the absolute min and max differences, normalized."""
    p, r = _arrays(pred, ref)
    d = np.abs(p.min(axis=1) - r.min(axis=1)) + np.abs(p.max(axis=1) - r.max(axis=1))
    return 0.5 * d / _scale(r, k)


def anrmse(pred, ref, k: float = 1.0) -> float:
    return float(np.mean(nrmse_per_channel(pred, ref, k)))


def nammae(pred, ref, k: float = 1.0) -> float:
    return float(np.mean(ammae_per_channel(pred, ref, k)))


def eps_t(pred, ref, k: float = 1.0) -> TimeSeries:
    """Time-resolved error: channel mean of ``|pred - ref| / (k SD)``."""
    p, r = _arrays(pred, ref)
    e = np.mean(np.abs(p - r) / _scale(r, k)[:, None], axis=0)
    t0, dt = (ref.t0, ref.dt) if isinstance(ref, TimeSeries) else (0.0, 1.0)
    return TimeSeries(("eps",), t0, dt, e[None, :])


@dataclass(frozen=True)
class MetricReport:
    anrmse: float
    nammae: float
    eps: TimeSeries
    k: float = 1.0
    per_variable: dict[str, tuple[float, float]] = field(default_factory=dict)

    @property
    def worst_variable(self) -> str:
        return max(self.per_variable, key=lambda c: self.per_variable[c][0])


def evaluate(pred: TimeSeries, ref: TimeSeries, k: float = 1.0,
             channels: tuple[str, ...] | None = None) -> MetricReport:
    """All metrics at once; ``channels`` restricts the averaged set."""
    if pred.channel_names != ref.channel_names:
        raise ShapeMismatch(f"channels differ: {pred.channel_names} vs {ref.channel_names}")
    if channels is not None:
        pred, ref = pred.select(channels), ref.select(channels)
    nr = nrmse_per_channel(pred, ref, k)
    am = ammae_per_channel(pred, ref, k)
    per = {c: (float(a), float(b)) for c, a, b in zip(ref.channel_names, nr, am)}
    return MetricReport(float(np.mean(nr)), float(np.mean(am)), eps_t(pred, ref, k), k, per)
