"""Delay (Hankel) embedding of state and input snapshots.

Augmented vectors are stacked newest block first::

    xhat_j = [x_j; x_{j-1}; ...; x_{j-s}]      (N(s+1) rows)
    uhat_j = [u_j; u_{j-1}; ...; u_{j-z}]      (Q(z+1) rows)

and the regression pair is ``Yhat = [X; S; U; Z]`` (columns ``yhat_j``) with
``Xhat' = [X'; S']`` (columns ``xhat_{j+1}``).
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError, InsufficientHistory, LengthMismatch, WrongHistoryLength
from .timeseries import TimeSeries


@dataclass(frozen=True)
class EmbeddingDims:
    N: int
    Q: int
    m: int
    s: int
    z: int

    def __post_init__(self):
        for name in ("N", "Q", "m", "s", "z"):
            v = getattr(self, name)
            if int(v) != v or v < 0:
                raise DataError(f"{name} must be a non-negative integer, got {v}")
            object.__setattr__(self, name, int(v))
        if self.N < 1:
            raise DataError("need at least one state channel")
        if self.m < self.s + 2 or self.m < self.z + 2:
            raise DataError(f"m={self.m} too small for s={self.s}, z={self.z}")

    @property
    def state_rows(self) -> int:
        return self.N * (self.s + 1)

    @property
    def input_rows(self) -> int:
        return self.Q * (self.z + 1)

    @property
    def lag(self) -> int:
        """Earliest sample index that has every delayed copy available."""
        return max(self.s, self.z)


@dataclass(frozen=True)
class SnapshotMatrices:
    Yhat: np.ndarray
    Xhat_prime: np.ndarray
    dims: EmbeddingDims

    def blocks(self) -> dict[str, np.ndarray]:
        """Split into the named blocks X, S, U, Z, X', S'."""
        d = self.dims
        n, r = d.N, d.state_rows
        return {
            "X": self.Yhat[:n], "S": self.Yhat[n:r],
            "U": self.Yhat[r:r + d.Q], "Z": self.Yhat[r + d.Q:],
            "X'": self.Xhat_prime[:n], "S'": self.Xhat_prime[n:],
        }

    def dump_csv(self, directory: str | Path) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        np.savetxt(directory / "Yhat.csv", self.Yhat, delimiter=",", fmt="%.17g")
        np.savetxt(directory / "Xhat_prime.csv", self.Xhat_prime, delimiter=",", fmt="%.17g")


def _as_array(a, rows: int | None = None) -> np.ndarray:
    if a is None:
        return np.zeros((0 if rows is None else rows, 0))
    if isinstance(a, TimeSeries):
        return a.data
    a = np.asarray(a, dtype=float)
    return a[None, :] if a.ndim == 1 else a


def lag_stack(a: np.ndarray, start: int, lags: int, ncols: int) -> np.ndarray:
    """Rows ``[a_t; a_{t-1}; ...; a_{t-lags}]`` for ``t = start .. start+ncols-1``."""
    return np.vstack([a[:, start - r:start - r + ncols] for r in range(lags + 1)])


def build_embedding(state, input, dims: EmbeddingDims,
                    start_index: int | None = None) -> SnapshotMatrices:
    """Assemble ``Yhat`` and ``Xhat'`` from ``m`` snapshots starting at ``start_index``.

    ``state`` and ``input`` may be :class:`TimeSeries` or channel-major arrays;
    ``input`` may be ``None`` when ``dims.Q == 0``. ``start_index`` defaults to
    ``max(s, z)``, the first sample whose delayed copies all exist; no padding
    is ever used.
    """
    x = _as_array(state)
    u = _as_array(input) if input is not None else np.zeros((0, x.shape[1]))
    if isinstance(state, TimeSeries) and isinstance(input, TimeSeries):
        if not np.isclose(state.dt, input.dt) or not np.isclose(state.t0, input.t0):
            raise LengthMismatch("state and input are not on the same time grid")
    if x.shape[0] != dims.N or u.shape[0] != dims.Q:
        raise LengthMismatch(
            f"got {x.shape[0]} state / {u.shape[0]} input channels, dims say {dims.N}/{dims.Q}")
    if dims.Q and u.shape[1] != x.shape[1]:
        raise LengthMismatch(f"state has {x.shape[1]} samples, input {u.shape[1]}")

    j = dims.lag if start_index is None else int(start_index)
    if j < dims.lag:
        raise InsufficientHistory(
            f"start index {j} leaves no room for s={dims.s}, z={dims.z} delays")
    ncols = dims.m - 1
    if j + ncols > x.shape[1] - 1:
        raise LengthMismatch(
            f"m={dims.m} snapshots from index {j} need {j + dims.m} samples, have {x.shape[1]}")

    Xs = lag_stack(x, j, dims.s, ncols)
    Us = lag_stack(u, j, dims.z, ncols) if dims.Q else np.zeros((0, ncols))
    return SnapshotMatrices(np.vstack([Xs, Us]), lag_stack(x, j + 1, dims.s, ncols), dims)


def augment_state(history, s: int | None = None) -> np.ndarray:
    """Stack ``s+1`` snapshots (newest first) into one augmented vector."""
    h = np.asarray(history, dtype=float)
    if h.ndim == 1:
        h = h[:, None]
    if h.ndim != 2 or (s is not None and h.shape[0] != s + 1):
        raise WrongHistoryLength(
            f"expected {'s+1' if s is None else s + 1} snapshots, got shape {h.shape}")
    return h.reshape(-1)
