"""Moving-block bootstrap, Gaussian KDE and Jensen-Shannon divergence.

Used to compare the distribution of predicted values with that of the
reference, with bootstrap confidence intervals on both the densities and the
divergence.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from .errors import ConstantSeries, DataError, DegenerateSample, GridMismatch
from .timeseries import round_half_away

GRID_POINTS = 512
GRID_PAD = 3.0  # bandwidths of padding on each side of the default grid


@dataclass(frozen=True)
class BootstrapSpec:
    """``block_length=None`` picks the optimal block length per series."""

    n_resamples: int = 100
    rng_seed: int = 0
    block_length: int | None = None

    def __post_init__(self):
        if self.n_resamples < 2:
            raise DataError("n_resamples must be at least 2")
        if self.block_length is not None and self.block_length < 1:
            raise DataError("block_length must be positive")


@dataclass(frozen=True)
class Pdf:
    grid: np.ndarray
    density: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        d = np.asarray(self.density, dtype=float)
        if g.ndim != 1 or g.shape != d.shape or g.size < 2:
            raise GridMismatch(f"grid {g.shape} and density {d.shape} must be equal 1-D vectors")
        if np.any(np.diff(g) <= 0):
            raise GridMismatch("grid must be strictly increasing")
        if np.any(d < 0):
            raise DataError("density must be non-negative")
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "density", d)

    def integral(self) -> float:
        return float(trapezoid(self.density, self.grid))


@dataclass(frozen=True)
class PdfBand:
    mean: Pdf
    lower: Pdf
    upper: Pdf
    coverage: float


def _series(xi) -> np.ndarray:
    x = np.asarray(xi, dtype=float).ravel()
    if not np.all(np.isfinite(x)):
        raise DataError("series contains non-finite values")
    return x


# block bootstrap -------------------------------------------------------
def lag1_coefficient(xi) -> float:
    """Lag-one autocorrelation, scaled by T/(T-1)."""
    x = _series(xi)
    T = x.size
    if T < 3:
        raise DataError("need at least three samples")
    d = x - x.mean()
    den = float(d @ d)
    if den == 0:
        raise ConstantSeries("series is constant")
    return T * float(d[1:] @ d[:-1]) / ((T - 1) * den)


def optimal_block_length(xi) -> int:
    """``round((2 phi / a)^(2/3) T^(1/3))`` with ``a = (1 - phi)(1 + phi)``; 1 when phi <= 0."""
    x = _series(xi)
    phi = lag1_coefficient(x)
    if phi <= 0:
        return 1
    if phi >= 1:
        return x.size
    a = (1 - phi) * (1 + phi)
    r = round_half_away((2 * phi / a) ** (2 / 3) * x.size ** (1 / 3))
    return int(min(max(1, r), x.size))


def _block_resample(x: np.ndarray, r: int, rng: np.random.Generator) -> np.ndarray:
    T = x.size
    n_blocks = math.ceil(T / r)
    starts = rng.integers(0, T - r, size=n_blocks, endpoint=True)
    idx = (starts[:, None] + np.arange(r)).ravel()[:T]
    return x[idx]


def _stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), *map(int, key)])


def mbb_resample(xi, spec: BootstrapSpec) -> list[np.ndarray]:
    """``n_resamples`` moving-block resamples of exactly ``len(xi)`` samples.

    Resample ``i`` draws its blocks from a stream keyed by ``(rng_seed, i)``.
    """
    x = _series(xi)
    r = spec.block_length or optimal_block_length(x)
    if r > x.size:
        raise DataError(f"block length {r} exceeds series length {x.size}")
    return [_block_resample(x, r, _stream(spec.rng_seed, i)) for i in range(spec.n_resamples)]


# density estimation ----------------------------------------------------
def bandwidth(xi) -> float:
    """``1.06 min(SD, IQR) T^(-1/5)``; the IQR is ignored when it is zero."""
    x = _series(xi)
    if x.size < 2:
        raise DegenerateSample("need at least two samples")
    sd = float(np.std(x, ddof=1))
    q25, q75 = np.quantile(x, [0.25, 0.75])
    iqr = float(q75 - q25)
    spread = min(sd, iqr) if iqr > 0 else sd
    if spread <= 0:
        raise DegenerateSample("sample has zero spread")
    return 1.06 * spread * x.size ** -0.2


def default_grid(xi, h: float | None = None, n: int = GRID_POINTS) -> np.ndarray:
    x = _series(xi)
    h = bandwidth(x) if h is None else h
    return np.linspace(x.min() - GRID_PAD * h, x.max() + GRID_PAD * h, n)


def kde_density(xi, grid, h: float, chunk: int = 4096) -> np.ndarray:
    """Raw Gaussian kernel sum ``1/(T h) sum_i K((y - xi_i)/h)`` on ``grid``."""
    x = _series(xi)
    y = np.asarray(grid, dtype=float)
    out = np.zeros_like(y)
    for lo in range(0, x.size, chunk):
        u = (y[:, None] - x[None, lo:lo + chunk]) / h
        out += np.exp(-0.5 * u * u).sum(axis=1)
    return out / (x.size * h * math.sqrt(2 * math.pi))


def kde(xi, grid=None, h: float | None = None) -> Pdf:
    """Gaussian KDE renormalized to unit trapezoidal mass on ``grid``.

    Without ``grid`` the default 512-point grid spanning three bandwidths
    beyond the sample range is used.
    """
    x = _series(xi)
    h = bandwidth(x) if h is None else float(h)
    grid = default_grid(x, h) if grid is None else np.asarray(grid, dtype=float)
    d = kde_density(x, grid, h)
    mass = trapezoid(d, grid)
    if mass <= 0:
        raise DegenerateSample("no kernel mass falls on the grid")
    return Pdf(grid, d / mass)


def shared_grid(*series, n: int = GRID_POINTS) -> np.ndarray:
    """Grid covering the union range of all series, padded by the widest bandwidth."""
    xs = [_series(s) for s in series]
    h = max(bandwidth(x) for x in xs)
    lo = min(x.min() for x in xs) - GRID_PAD * h
    hi = max(x.max() for x in xs) + GRID_PAD * h
    return np.linspace(lo, hi, n)


# divergence ------------------------------------------------------------
def _cell_probabilities(p: Pdf) -> np.ndarray:
    w = np.empty_like(p.grid)
    dg = np.diff(p.grid)
    w[0], w[-1] = dg[0] / 2, dg[-1] / 2
    w[1:-1] = (dg[:-1] + dg[1:]) / 2
    q = p.density * w
    s = q.sum()
    if s <= 0:
        raise DegenerateSample("density has no mass")
    return q / s


def _kl(p: np.ndarray, m: np.ndarray) -> float:
    nz = p > 0
    return float(np.sum(p[nz] * np.log(p[nz] / m[nz])))


def jsd(v: Pdf, w: Pdf) -> float:
    """Discrete Jensen-Shannon divergence (natural log), bounded by ln 2."""
    if v.grid.shape != w.grid.shape or not np.array_equal(v.grid, w.grid):
        raise GridMismatch("densities must share the same grid")
    p, q = _cell_probabilities(v), _cell_probabilities(w)
    m = 0.5 * (p + q)
    return 0.5 * _kl(p, m) + 0.5 * _kl(q, m)


# bootstrap bands -------------------------------------------------------
def _quantile_pair(a: np.ndarray, coverage: float, axis: int = 0):
    if not 0 <= coverage < 1:
        raise DataError("coverage must lie in [0, 1)")
    lo, hi = np.quantile(a, [(1 - coverage) / 2, (1 + coverage) / 2], axis=axis)
    return lo, hi


def pdf_band(xi, spec: BootstrapSpec, coverage: float = 0.95, grid=None) -> PdfBand:
    """KDE of every bootstrap resample on one grid; pointwise mean and quantiles."""
    x = _series(xi)
    grid = default_grid(x) if grid is None else np.asarray(grid, dtype=float)
    dens = np.array([kde(r, grid).density for r in mbb_resample(x, spec)])
    lo, hi = _quantile_pair(dens, coverage)
    mean = dens.mean(axis=0)
    # in sparse tails the mean can exceed the upper quantile; widen rather than clip
    lo, hi = np.minimum(lo, mean), np.maximum(hi, mean)
    return PdfBand(Pdf(grid, mean), Pdf(grid, lo), Pdf(grid, hi), coverage)


@dataclass(frozen=True)
class JsdSummary:
    ev: float
    lower: float
    upper: float

    @property
    def width(self) -> float:
        return self.upper - self.lower


def jsd_band(v_series, w_series, spec: BootstrapSpec, coverage: float = 0.95,
             grid=None) -> JsdSummary:
    """JSD of independently resampled pairs; expected value and quantile interval.

    Pair ``i`` resamples ``v`` from stream ``(seed, i, 0)`` and ``w`` from
    ``(seed, i, 1)``; both densities live on the shared grid of the originals.
    """
    v, w = _series(v_series), _series(w_series)
    grid = shared_grid(v, w) if grid is None else np.asarray(grid, dtype=float)
    rv = spec.block_length or optimal_block_length(v)
    rw = spec.block_length or optimal_block_length(w)
    if rv > v.size or rw > w.size:
        raise DataError("block length exceeds series length")
    vals = np.empty(spec.n_resamples)
    for i in range(spec.n_resamples):
        a = _block_resample(v, rv, _stream(spec.rng_seed, i, 0))
        b = _block_resample(w, rw, _stream(spec.rng_seed, i, 1))
        vals[i] = jsd(kde(a, grid), kde(b, grid))
    lo, hi = _quantile_pair(vals, coverage)
    return JsdSummary(float(vals.mean()), float(lo), float(hi))
