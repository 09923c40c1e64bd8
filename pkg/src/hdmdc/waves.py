"""Wave elevation synthesis and probe-signal processing.

Irregular seas are a linear superposition of equally spaced components with
Pierson-Moskowitz amplitudes and random phases; regular seas are a single
sinusoid. Both can be evaluated at any position along the tank (deep-water
dispersion for irregular components, the given phase velocity for regular
waves), which is how the two probe signals are produced.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid
from scipy.signal import periodogram

from .errors import AliasedBand, DataError, NonPositiveFrequency, NoPositiveLagPeak
from .timeseries import TimeSeries, round_half_away

G = 9.81
MODEL_LENGTH = 1.40

#: head-sea regular wave matrix: wavelength/model length -> phase velocity [m/s]
REGULAR_WAVES = {1.5: 1.811, 2.0: 2.090, 3.0: 2.560}


@dataclass(frozen=True)
class PmSpectrum:
    hs: float
    tp: float

    def __post_init__(self):
        if self.hs <= 0 or self.tp <= 0:
            raise DataError(f"hs and tp must be positive, got {self}")


def pm_density(spec: PmSpectrum, f):
    """Pierson-Moskowitz energy density E(f) in m^2 s."""
    f = np.asarray(f, dtype=float)
    if np.any(f <= 0):
        raise NonPositiveFrequency("spectrum is defined for f > 0 only")
    tp4 = spec.tp ** -4
    e = 5.0 / 16.0 * spec.hs ** 2 * tp4 * f ** -5 * np.exp(-1.25 * tp4 * f ** -4)
    return float(e) if e.ndim == 0 else e


@dataclass(frozen=True)
class IrregularWave:
    frequencies: np.ndarray
    amplitudes: np.ndarray
    phases: np.ndarray
    rng_seed: int | None = None

    @property
    def n_w(self) -> int:
        return len(self.frequencies)

    def elevation(self, t, x: float = 0.0) -> np.ndarray:
        """eta(x, t), with x measured downstream from the reference point."""
        t = np.asarray(t, dtype=float)
        k = (2 * np.pi * self.frequencies) ** 2 / G
        arg = np.outer(t, 2 * np.pi * self.frequencies) + (self.phases - k * x)
        return np.sin(arg) @ self.amplitudes


@dataclass(frozen=True)
class RegularWave:
    height: float
    wavelength_ratio: float
    model_length: float = MODEL_LENGTH
    phase_velocity: float = field(default=float("nan"))

    def __post_init__(self):
        if math.isnan(self.phase_velocity):
            v = REGULAR_WAVES.get(float(self.wavelength_ratio))
            if v is None:
                v = math.sqrt(G * self.wavelength_ratio * self.model_length / (2 * math.pi))
            object.__setattr__(self, "phase_velocity", v)
        if self.frequency <= 0:
            raise DataError(f"non-positive regular wave frequency for {self}")

    @property
    def wavelength(self) -> float:
        return self.wavelength_ratio * self.model_length

    @property
    def frequency(self) -> float:
        return self.phase_velocity / self.wavelength

    def elevation(self, t, x: float = 0.0) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return 0.5 * self.height * np.sin(2 * np.pi * self.frequency * (t - x / self.phase_velocity))


def _time_grid(duration: float, dt: float) -> np.ndarray:
    n = round_half_away(duration / dt)
    if n < 1:
        raise DataError(f"duration {duration} s gives an empty series at dt={dt}")
    return dt * np.arange(n)


def irregular_components(spec: PmSpectrum, n_w: int, f_band: tuple[float, float], seed: int,
                         convention: str = "standard") -> IrregularWave:
    """Component frequencies (band ends included), amplitudes and phases.

    ``convention="standard"`` uses A = sqrt(2 E df), for which 4 sqrt(m0)
    reproduces hs; ``"4pi"`` uses A = sqrt(4 pi E df), which inflates the
    realized height by sqrt(2 pi).
    """
    if n_w < 2:
        raise DataError("need at least two components")
    f_lo, f_hi = f_band
    if not 0 < f_lo < f_hi:
        raise NonPositiveFrequency(f"invalid band {f_band}")
    f = np.linspace(f_lo, f_hi, n_w)
    df = (f_hi - f_lo) / (n_w - 1)
    factor = {"standard": 2.0, "4pi": 4.0 * np.pi}[convention]
    amps = np.sqrt(factor * pm_density(spec, f) * df)
    phases = np.random.default_rng(seed).uniform(0.0, 2 * np.pi, n_w)
    return IrregularWave(f, amps, phases, seed)


def synthesize_irregular(spec: PmSpectrum, n_w: int, f_band: tuple[float, float],
                         duration: float, dt: float, seed: int,
                         convention: str = "standard") -> tuple[TimeSeries, IrregularWave]:
    if dt >= 1.0 / (2.0 * f_band[1]):
        raise AliasedBand(f"dt={dt} cannot resolve {f_band[1]} Hz")
    wave = irregular_components(spec, n_w, f_band, seed, convention)
    t = _time_grid(duration, dt)
    return TimeSeries(("eta",), 0.0, dt, wave.elevation(t)), wave


def synthesize_regular(wave: RegularWave, duration: float, dt: float) -> TimeSeries:
    if dt >= 1.0 / (2.0 * wave.frequency):
        raise AliasedBand(f"dt={dt} cannot resolve {wave.frequency:.4f} Hz")
    t = _time_grid(duration, dt)
    return TimeSeries(("eta",), 0.0, dt, wave.elevation(t))


def significant_height(eta) -> float:
    """4 sqrt(m0) with m0 the elevation variance."""
    eta = eta.data[0] if isinstance(eta, TimeSeries) else np.asarray(eta)
    return 4.0 * float(np.std(eta))


def spectrum_shape_error(eta: TimeSeries, wave: IrregularWave, spec: PmSpectrum,
                         per_band: int = 5) -> float:
    """Relative L2 error between the band-averaged periodogram and E(f).

    Bands are ``per_band`` component spacings wide and tile the generation
    band, so each band's periodogram mean measures the energy of whole
    components.
    """
    f, pxx = periodogram(eta.data[0], fs=1.0 / eta.dt, window="boxcar", detrend=False)
    fc = wave.frequencies
    df = fc[1] - fc[0]
    edges = fc[0] - df / 2 + df * per_band * np.arange(len(fc) // per_band + 1)
    measured, nominal = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        sel = (f >= lo) & (f < hi)
        fine = np.linspace(lo, hi, 201)
        measured.append(pxx[sel].mean())
        nominal.append(trapezoid(pm_density(spec, fine), fine) / (hi - lo))
    measured, nominal = np.array(measured), np.array(nominal)
    return float(np.linalg.norm(measured - nominal) / np.linalg.norm(nominal))


# probes ----------------------------------------------------------------
@dataclass(frozen=True)
class ProbeGeometry:
    x_fwd: float = 48.42
    x_cog: float = 52.09
    x0: float = 0.0

    def __post_init__(self):
        if not self.x_cog > self.x_fwd:
            raise DataError("the cog probe must be downstream of the forward probe")

    @property
    def spacing(self) -> float:
        return self.x_cog - self.x_fwd


PROBE_CHANNELS = ("eta_fwd_kn", "eta_cog_kn")


def probe_signals(wave, geom: ProbeGeometry, duration: float, dt: float) -> TimeSeries:
    """Elevation at both probes, the forward probe being the phase reference."""
    t = _time_grid(duration, dt)
    fmax = wave.frequency if isinstance(wave, RegularWave) else wave.frequencies.max()
    if dt >= 1.0 / (2.0 * fmax):
        raise AliasedBand(f"dt={dt} cannot resolve {fmax:.4f} Hz")
    data = np.vstack([wave.elevation(t, 0.0), wave.elevation(t, geom.spacing)])
    return TimeSeries(PROBE_CHANNELS, 0.0, dt, data)


def _lag_correlation(a: np.ndarray, b: np.ndarray, lag: int) -> float:
    x, y = a[:len(a) - lag], b[lag:]
    x = x - x.mean()
    y = y - y.mean()
    den = math.sqrt(float(x @ x) * float(y @ y))
    return float(x @ y) / den if den > 0 else 0.0


def correlation_lag(eta_fwd: TimeSeries, eta_cog: TimeSeries, max_lag: int,
                    min_lag: int = 1) -> int:
    """Positive lag (samples) maximizing corr[fwd(t), cog(t + lag)].

    Raises :class:`NoPositiveLagPeak` when lag 0 correlates at least as
    well as the best positive lag, when the best lag sits on the lower
    search boundary without being a local peak, or when no lag correlates
    positively.
    """
    a, b = eta_fwd.data[0], eta_cog.data[0]
    if len(a) != len(b) or not math.isclose(eta_fwd.dt, eta_cog.dt):
        raise DataError("probe series must have equal length and dt")
    if np.std(a) == 0 or np.std(b) == 0:
        raise DataError("probe series must not be constant")
    min_lag = max(1, min_lag)
    max_lag = min(max_lag, len(a) - 2)
    if max_lag < min_lag:
        raise NoPositiveLagPeak("empty lag search window")
    lags = np.arange(min_lag, max_lag + 1)
    corr = np.array([_lag_correlation(a, b, int(k)) for k in lags])
    best = int(np.argmax(corr))  # first maximum -> smallest lag on ties
    if corr[best] <= 0:
        raise NoPositiveLagPeak("no positive correlation at positive lags")
    if _lag_correlation(a, b, 0) >= corr[best]:
        raise NoPositiveLagPeak("correlation peaks at lag 0")
    if best == 0 and _lag_correlation(a, b, min_lag - 1) >= corr[0]:
        raise NoPositiveLagPeak(f"correlation peaks at or below lag {min_lag - 1}")
    return int(lags[best])


def effective_celerity(eta_fwd: TimeSeries, eta_cog: TimeSeries, geom: ProbeGeometry,
                       c_min: float = 0.5, c_max: float | None = None) -> float:
    """Wave speed from the probe spacing and the correlation lag.

    The search covers lags ``[spacing/c_max, spacing/c_min]`` (lag 0 always
    excluded).
    """
    dt = eta_fwd.dt
    max_lag = int(math.floor(geom.spacing / c_min / dt))
    min_lag = 1 if c_max is None else max(1, int(math.ceil(geom.spacing / c_max / dt)))
    lag = correlation_lag(eta_fwd, eta_cog, max_lag, min_lag)
    return geom.spacing / (lag * dt)


def delay_correct(eta: TimeSeries, surge: TimeSeries | np.ndarray, c: float,
                  x0: float = 0.0) -> TimeSeries:
    """Evaluate every channel of ``eta`` at ``t - (surge(t) - x0)/c``.

    Fractional delays use linear interpolation; lookups beyond the record
    clamp to the end samples and are reported with a warning.
    """
    if c <= 0:
        raise DataError("celerity must be positive")
    x = surge.data[0] if isinstance(surge, TimeSeries) else np.asarray(surge, dtype=float)
    if len(x) != eta.n_samples:
        raise DataError("surge and elevation must be aligned sample by sample")
    t = eta.times
    tq = t - (x - x0) / c
    clamped = int(np.count_nonzero((tq < t[0]) | (tq > t[-1])))
    if clamped:
        warnings.warn(f"delay correction clamped {clamped} samples at the record edges",
                      stacklevel=2)
    data = np.vstack([np.interp(tq, t, row) for row in eta.data])
    return eta.with_data(data)
