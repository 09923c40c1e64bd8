"""Deterministic HDMDc: Tikhonov-regularized operator estimation and rollout."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.linalg as la

from .errors import (
    DataError,
    InputTooShort,
    InsufficientWarmup,
    LengthMismatch,
    NoCrossings,
    NonFinite,
    SingularGram,
)
from .hankel import EmbeddingDims, build_embedding, lag_stack
from .timeseries import Standardizer, TimeSeries, round_half_away

MODEL_VERSION = "hdmdc-model/1"


@dataclass(frozen=True)
class HyperParams:
    """Time-length hyperparameters; sample counts are derived on demand.

    ``l_tr`` is the training length (``m`` snapshots), ``l_dx``/``l_du`` the
    state/input delay spans (``s``/``z`` delayed copies), ``lam`` the
    Tikhonov weight.
    """

    l_tr: float
    l_dx: float
    l_du: float
    lam: float

    def __post_init__(self):
        if min(self.l_tr, self.l_dx, self.l_du) < 0 or self.lam < 0:
            raise DataError(f"hyperparameters must be non-negative: {self}")
        if not (self.l_tr > self.l_dx and self.l_tr > self.l_du):
            raise DataError(f"l_tr must exceed both delay spans: {self}")

    def counts(self, dt: float) -> tuple[int, int, int]:
        """``(m, s, z)`` as nearest integers of the lengths over ``dt``."""
        return (round_half_away(self.l_tr / dt), round_half_away(self.l_dx / dt),
                round_half_away(self.l_du / dt))

    def dims(self, dt: float, n_state: int, n_input: int) -> EmbeddingDims:
        m, s, z = self.counts(dt)
        if m < max(s, z) + 3:
            raise DataError(f"m={m} must be at least max(s, z) + 3 = {max(s, z) + 3}")
        return EmbeddingDims(n_state, n_input, m, s, z)

    def to_dict(self) -> dict:
        return {"l_tr": self.l_tr, "l_dx": self.l_dx, "l_du": self.l_du, "lambda": self.lam}

    @classmethod
    def from_dict(cls, d: dict) -> "HyperParams":
        return cls(float(d["l_tr"]), float(d["l_dx"]), float(d["l_du"]),
                   float(d.get("lambda", d.get("lam"))))

    @classmethod
    def defaults(cls, period: float) -> "HyperParams":
        return cls(20 * period, period, 5 * period, 100.0)


def tikhonov_solve(Y: np.ndarray, Xp: np.ndarray, lam: float) -> np.ndarray:
    """Minimize ``||Xp - G Y||_F^2 + lam ||G||_F^2`` over ``G``.

    Solves ``(Y Y^T + lam I) G^T = Y Xp^T`` with a Cholesky factorization,
    falling back to a pivoted symmetric (LDL^T) solve when the Gram matrix is
    numerically semidefinite.
    """
    Y = np.asarray(Y, dtype=float)
    Xp = np.asarray(Xp, dtype=float)
    if Y.shape[1] != Xp.shape[1]:
        raise LengthMismatch(f"Y has {Y.shape[1]} columns, X' has {Xp.shape[1]}")
    if lam < 0:
        raise DataError("lambda must be non-negative")
    if lam == 0 and np.linalg.matrix_rank(Y) < Y.shape[0]:
        raise SingularGram("Y Y^T is rank deficient and lambda = 0")
    gram = Y @ Y.T
    gram[np.diag_indices_from(gram)] += lam
    rhs = Y @ Xp.T
    try:
        Gt = la.cho_solve(la.cho_factor(gram, lower=True, check_finite=False), rhs,
                          check_finite=False)
    except la.LinAlgError:
        try:
            Gt = la.solve(gram, rhs, assume_a="sym", check_finite=False)
        except la.LinAlgError as exc:
            raise SingularGram(str(exc)) from None
    G = Gt.T
    if not np.all(np.isfinite(G)):
        raise NonFinite("operator estimate contains non-finite entries")
    return G


@dataclass(frozen=True)
class HdmdcModel:
    A_hat: np.ndarray
    B_hat: np.ndarray
    dims: EmbeddingDims
    dt: float
    state_standardizer: Standardizer
    input_standardizer: Standardizer
    hyper: HyperParams

    def __post_init__(self):
        d = self.dims
        if self.A_hat.shape != (d.state_rows, d.state_rows):
            raise DataError(f"A_hat shape {self.A_hat.shape} inconsistent with {d}")
        if self.B_hat.shape != (d.state_rows, d.input_rows):
            raise DataError(f"B_hat shape {self.B_hat.shape} inconsistent with {d}")
        if not (np.all(np.isfinite(self.A_hat)) and np.all(np.isfinite(self.B_hat))):
            raise NonFinite("model matrices contain non-finite entries")

    @property
    def state_names(self) -> tuple[str, ...]:
        return self.state_standardizer.channel_names

    @property
    def input_names(self) -> tuple[str, ...]:
        return self.input_standardizer.channel_names

    # persistence ---------------------------------------------------------
    def to_json(self) -> str:
        d = self.dims

        def mat(a):
            return {"shape": list(a.shape), "data": a.reshape(-1).tolist()}

        payload = {
            "version": MODEL_VERSION,
            "dims": {"N": d.N, "Q": d.Q, "m": d.m, "s": d.s, "z": d.z},
            "dt": self.dt,
            "hyper": self.hyper.to_dict(),
            "state_standardizer": self.state_standardizer.to_dict(),
            "input_standardizer": self.input_standardizer.to_dict(),
            "A_hat": mat(self.A_hat),
            "B_hat": mat(self.B_hat),
        }
        return json.dumps(payload, indent=1)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def from_json(cls, text: str) -> "HdmdcModel":
        p = json.loads(text)
        if p.get("version") != MODEL_VERSION:
            raise DataError(f"unsupported model version {p.get('version')!r}")

        def mat(d):
            return np.array(d["data"], dtype=float).reshape(d["shape"])

        return cls(mat(p["A_hat"]), mat(p["B_hat"]), EmbeddingDims(**p["dims"]), float(p["dt"]),
                   Standardizer.from_dict(p["state_standardizer"]),
                   Standardizer.from_dict(p["input_standardizer"]),
                   HyperParams.from_dict(p["hyper"]))

    @classmethod
    def load(cls, path: str | Path) -> "HdmdcModel":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


def fit(state: TimeSeries, input: TimeSeries, hyper: HyperParams,
        standardize: bool = True) -> HdmdcModel:
    """Identify ``[A_hat B_hat]`` from the leading ``max(s, z) + m`` samples.

    The first ``max(s, z)`` samples only provide delay history; the regression
    uses ``m - 1`` snapshot pairs after them. With ``standardize`` the z-score
    statistics of that same segment are used and stored in the model.
    """
    if state.n_samples != input.n_samples or not math.isclose(state.dt, input.dt):
        raise LengthMismatch("state and input must share length and dt")
    dims = hyper.dims(state.dt, state.n_channels, input.n_channels)
    need = dims.lag + dims.m
    if state.n_samples < need:
        raise LengthMismatch(
            f"training data has {state.n_samples} samples, {need} needed for {dims}")
    x = state.window(0, need)
    u = input.window(0, need)
    if standardize:
        sx, su = Standardizer.fit(x), Standardizer.fit(u)
    else:
        sx, su = Standardizer.identity(x.channel_names), Standardizer.identity(u.channel_names)
    snaps = build_embedding(sx.apply(x).data, su.apply(u).data, dims)
    G = tikhonov_solve(snaps.Yhat, snaps.Xhat_prime, hyper.lam)
    ns = dims.state_rows
    return HdmdcModel(G[:, :ns], G[:, ns:], dims, state.dt, sx, su, hyper)


@dataclass(frozen=True)
class Prediction:
    series: TimeSeries
    initial_history: tuple[float, float]


def horizon_steps(horizon: float, dt: float) -> int:
    """Steps predicted for a horizon; the endpoint of ``[0, l_te]`` is exclusive."""
    return round_half_away(horizon / dt)


def _align(model: HdmdcModel, input: TimeSeries, history: TimeSeries, n_steps: int):
    d = model.dims
    if history.channel_names != model.state_names:
        raise LengthMismatch(f"history channels {history.channel_names} != {model.state_names}")
    if input.channel_names != model.input_names:
        raise LengthMismatch(f"input channels {input.channel_names} != {model.input_names}")
    if not (math.isclose(history.dt, model.dt) and math.isclose(input.dt, model.dt)):
        raise LengthMismatch("history/input sampling differs from the model's dt")
    if history.n_samples < d.s + 1:
        raise InsufficientWarmup(f"need {d.s + 1} warm-up snapshots, got {history.n_samples}")
    t_last = history.t0 + (history.n_samples - 1) * history.dt
    k0 = round_half_away((t_last - input.t0) / model.dt)
    if abs(input.t0 + k0 * model.dt - t_last) > 1e-6 * model.dt:
        raise LengthMismatch("input and history are not on a common time grid")
    if k0 < d.z:
        raise InsufficientWarmup(f"input needs {d.z} samples of history before the first step")
    if k0 + n_steps > input.n_samples:
        raise InputTooShort(
            f"{n_steps} steps need input up to sample {k0 + n_steps - 1}, have {input.n_samples}")
    return k0, t_last


def predict_many(model: HdmdcModel, cases: Sequence[tuple[TimeSeries, TimeSeries]],
                 n_steps: int) -> list[TimeSeries]:
    """Roll the model forward for several (input, history) pairs at once.

    The rollout is closed-loop in the delayed state blocks and open-loop in
    the input: the input term ``B_hat uhat_k`` is formed for every step up
    front, then ``xhat_{k+1} = A_hat xhat_k + B_hat uhat_k`` is iterated with
    all cases stacked as columns.
    """
    d = model.dims
    if n_steps < 1:
        raise DataError("need at least one prediction step")
    sx, su = model.state_standardizer, model.input_standardizer
    W = len(cases)
    xhat = np.empty((d.state_rows, W))
    forcing = np.empty((n_steps, d.state_rows, W))
    t_start = []
    for w, (inp, hist) in enumerate(cases):
        k0, t_last = _align(model, inp, hist, n_steps)
        h = sx.apply(hist).data[:, hist.n_samples - d.s - 1:]
        xhat[:, w] = h[:, ::-1].T.reshape(-1)
        us = su.apply(inp).data
        forcing[:, :, w] = (model.B_hat @ lag_stack(us, k0, d.z, n_steps)).T
        t_start.append(t_last + model.dt)

    out = np.empty((n_steps, d.N, W))
    A = model.A_hat
    for k in range(n_steps):
        xhat = A @ xhat + forcing[k]
        out[k] = xhat[:d.N]
    if not np.all(np.isfinite(out)):
        raise NonFinite("prediction diverged to non-finite values")
    names = model.state_names
    return [sx.invert(TimeSeries(names, t_start[w], model.dt, out[:, :, w].T)) for w in range(W)]


def predict(model: HdmdcModel, input: TimeSeries, initial_history: TimeSeries,
            horizon: float) -> Prediction:
    """Predict ``round(horizon/dt)`` steps following the end of ``initial_history``.

    ``input`` must cover ``z`` samples before the last history sample and
    every step of the horizon.
    """
    n = horizon_steps(horizon, model.dt)
    series = predict_many(model, [(input, initial_history)], n)[0]
    h = initial_history
    return Prediction(series, (h.t0, h.t0 + (h.n_samples - 1) * h.dt))


def upward_crossings(x: np.ndarray, dt: float, t0: float = 0.0) -> np.ndarray:
    """Times of upward zero crossings of the mean-removed signal (linear interpolation)."""
    x = np.asarray(x, dtype=float)
    x = x - x.mean()
    k = np.flatnonzero((x[:-1] < 0) & (x[1:] >= 0))
    frac = -x[k] / (x[k + 1] - x[k])
    return t0 + (k + frac) * dt


def estimate_encounter_period(runs: Sequence[TimeSeries], channel: str | None = None) -> float:
    """Average encounter period over runs.

    Each run contributes the time between its first and last upward zero
    crossing divided by the number of complete periods in between.
    """
    periods = []
    for ts in runs:
        x = ts.channel(channel) if channel else ts.data[0]
        tc = upward_crossings(x, ts.dt, ts.t0)
        if tc.size < 2:
            raise NoCrossings(f"run starting at t={ts.t0} has {tc.size} upward crossings")
        periods.append((tc[-1] - tc[0]) / (tc.size - 1))
    if not periods:
        raise NoCrossings("no runs given")
    return float(np.mean(periods))
