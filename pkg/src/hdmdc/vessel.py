"""Synthetic moored-vessel oracle.

A 3-DOF (surge, heave, pitch) model stands in for towing-tank measurements.
It is linear at heart but carries three mild nonlinearities that a linear
delay-embedded model cannot represent exactly: quadratic damping, mooring
lines that go slack, and a moon-pool heave force proportional to
``eta |eta|``. Wave forcing is computed from the elevation at the vessel's
instantaneous surge position, obtained by shifting the cog probe signal in
time by ``(x - x0)/c``.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DataError, InconsistentInput, UnstableIntegration
from .timeseries import TimeSeries, round_half_away, save_csv
from .waves import (
    G,
    PROBE_CHANNELS,
    IrregularWave,
    PmSpectrum,
    ProbeGeometry,
    RegularWave,
    irregular_components,
    probe_signals,
)

STATE_CHANNELS = ("x", "z", "theta", "dx", "dz", "dtheta", "ddx", "ddz", "ddtheta",
                  "M_bow", "M_stern")
MOTION_CHANNELS = STATE_CHANNELS[:9]
LOAD_CHANNELS = STATE_CHANNELS[9:]

DEFAULT_NOISE = {
    "x": 2e-4, "z": 2e-4, "theta": 5e-4,
    "dx": 5e-4, "dz": 2e-3, "dtheta": 5e-3,
    "ddx": 5e-3, "ddz": 2e-2, "ddtheta": 5e-2,
    "M_bow": 6e-3, "M_stern": 6e-3,
    "eta_fwd_kn": 3e-4, "eta_cog_kn": 3e-4,
}


@dataclass(frozen=True)
class VesselParams:
    """Physical coefficients in SI units.

    Wave excitation is linear in the local elevation (heave) and in its
    time derivative (surge, pitch: proportional to the wave slope for a
    progressive wave). ``moon_pool`` scales an extra heave force
    ``moon_pool * heave_stiffness * eta |eta|`` (units 1/m).
    """

    mass: float = 16.0
    pitch_inertia: float = 1.96
    added_mass: tuple[float, float, float] = (0.05, 0.8, 0.8)
    linear_damping: tuple[float, float, float] = (2.0, 80.0, 6.0)
    quadratic_damping: tuple[float, float, float] = (5.0, 50.0, 1.0)
    heave_stiffness: float = 4000.0
    pitch_stiffness: float = 300.0
    k_bow: float = 1.89
    k_stern: float = 1.33
    pretension: float = 0.015
    slack_threshold: float = 0.0
    surge_excitation: float = 15.0
    heave_excitation: float = 3200.0
    pitch_excitation: float = 50.0
    moon_pool: float = 1.0
    max_excursion: tuple[float, float, float] = (5.0, 1.0, 1.0)

    def __post_init__(self):
        if min(self.mass, self.pitch_inertia, self.heave_stiffness, self.pitch_stiffness,
               self.k_bow, self.k_stern) <= 0:
            raise DataError("mass, inertia and stiffnesses must be positive")
        if min(self.linear_damping) < 0 or min(self.quadratic_damping) < 0:
            raise DataError("damping must be non-negative")
        for name in ("added_mass", "linear_damping", "quadratic_damping", "max_excursion"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))

    @property
    def inertia(self) -> tuple[float, float, float]:
        ax, az, at = self.added_mass
        return (self.mass * (1 + ax), self.mass * (1 + az), self.pitch_inertia * (1 + at))

    def tensions(self, x):
        """Bow and stern line loads at surge ``x`` (slack lines carry no load)."""
        floor = self.slack_threshold
        bow = np.maximum(floor, self.pretension + self.k_bow * np.asarray(x))
        stern = np.maximum(floor, self.pretension - self.k_stern * np.asarray(x))
        return bow, stern

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "VesselParams":
        return cls(**{k: tuple(v) if isinstance(v, list) else v for k, v in d.items()})


@dataclass(frozen=True)
class SimOutput:
    state: TimeSeries
    input: TimeSeries


def mechanical_energy(params: VesselParams, y: np.ndarray) -> np.ndarray:
    """Kinetic + hydrostatic + mooring energy of states ``y`` (6 x n or 6,)."""
    y = np.asarray(y, dtype=float)
    mx, mz, mt = params.inertia
    x, z, th, vx, vz, vt = y
    p, f = params.pretension, params.slack_threshold
    kb, ks = params.k_bow, params.k_stern
    # potentials whose x-derivatives are the clamped line loads, zero at rest
    eb, es = p + kb * x, p - ks * x
    ub = np.where(eb >= f, (eb ** 2 - f ** 2) / (2 * kb), f * (x - (f - p) / kb))
    us = np.where(es >= f, (es ** 2 - f ** 2) / (2 * ks), -f * (x - (p - f) / ks))
    ub = ub - (p ** 2 - f ** 2) / (2 * kb)
    us = us - (p ** 2 - f ** 2) / (2 * ks)
    return (0.5 * (mx * vx ** 2 + mz * vz ** 2 + mt * vt ** 2)
            + 0.5 * (params.heave_stiffness * z ** 2 + params.pitch_stiffness * th ** 2)
            + ub + us)


def _fourth_order_derivative(v: np.ndarray, dt: float) -> np.ndarray:
    d = np.gradient(v, dt, edge_order=2)
    d[2:-2] = (-v[4:] + 8 * v[3:-1] - 8 * v[1:-3] + v[:-4]) / (12 * dt)
    return d


def simulate(params: VesselParams, wave: TimeSeries, celerity: float,
             dt_internal: float | None = None, seed: int = 0,
             noise: dict[str, float] | None = None, x0: float = 0.0,
             ramp: float = 0.0, initial: Sequence[float] | None = None,
             pitch_acc_from_rate: bool = False) -> SimOutput:
    """Integrate the vessel response to the probe elevations in ``wave``.

    ``wave`` holds the two probe channels; forcing uses the cog probe
    shifted by the surge-dependent delay ``(x - x0)/celerity``. Integration
    is fixed-step RK4 at ``dt_internal`` (a divisor of the wave step) and
    outputs are sampled at the wave step. ``ramp`` (seconds) fades the
    forcing in with a half cosine. ``noise`` maps channel names to the SD of
    additive Gaussian measurement noise drawn from ``seed``; probe channels
    may be listed too.
    """
    if wave.channel_names != PROBE_CHANNELS:
        raise InconsistentInput(f"wave must have channels {PROBE_CHANNELS}")
    if celerity <= 0:
        raise InconsistentInput("celerity must be positive")
    dt = wave.dt
    h = dt if dt_internal is None else float(dt_internal)
    n_sub = round_half_away(dt / h)
    if n_sub < 1 or abs(n_sub * h - dt) > 1e-9 * dt:
        raise InconsistentInput(f"dt_internal={h} must divide the wave step {dt}")
    h = dt / n_sub

    # a C2 spline keeps the forcing smooth when the surge delay moves the
    # query time off the sample grid; linear interpolation would cost RK4
    # its order
    n = wave.n_samples
    coef = CubicSpline(np.arange(n) * dt, wave.data[1]).c if n > 1 else np.zeros((4, 0))
    c3, c2, c1, c0 = (row.tolist() for row in coef)
    eta0, eta1 = float(wave.data[1, 0]), float(wave.data[1, -1])
    t_first = wave.t0
    t_last = wave.t0 + (n - 1) * dt
    inv_dt = 1.0 / dt
    inv_c = 1.0 / celerity

    mx, mz, mt = params.inertia
    dx_l, dz_l, dt_l = params.linear_damping
    qx, qz, qt = params.quadratic_damping
    kz, kt = params.heave_stiffness, params.pitch_stiffness
    kb, ks, pre, floor = params.k_bow, params.k_stern, params.pretension, params.slack_threshold
    gx, gz, gt = params.surge_excitation, params.heave_excitation, params.pitch_excitation
    alpha = params.moon_pool * kz
    lim_x, lim_z, lim_t = params.max_excursion
    ramp = float(ramp)

    def local_wave(t, x):
        tq = t - (x - x0) * inv_c
        if tq <= t_first:
            e, ed = eta0, 0.0
        elif tq >= t_last:
            e, ed = eta1, 0.0
        else:
            i = min(int((tq - t_first) * inv_dt), n - 2)
            f = tq - t_first - i * dt
            e = ((c3[i] * f + c2[i]) * f + c1[i]) * f + c0[i]
            ed = (3.0 * c3[i] * f + 2.0 * c2[i]) * f + c1[i]
        if ramp and t - t_first < ramp:
            w = 0.5 * (1.0 - math.cos(math.pi * (t - t_first) / ramp))
            e *= w
            ed *= w
        return e, ed

    def rhs(t, x, z, th, vx, vz, vt):
        e, ed = local_wave(t, x)
        tb = pre + kb * x
        tb = tb if tb > floor else floor
        ts = pre - ks * x
        ts = ts if ts > floor else floor
        fx = -gx * ed - dx_l * vx - qx * vx * abs(vx) + ts - tb
        fz = -kz * z + gz * e + alpha * e * abs(e) - dz_l * vz - qz * vz * abs(vz)
        ft = -kt * th - gt * ed - dt_l * vt - qt * vt * abs(vt)
        return fx / mx, fz / mz, ft / mt

    y = [0.0] * 6 if initial is None else [float(v) for v in initial]
    if len(y) != 6:
        raise InconsistentInput("initial state needs 6 entries (x, z, theta and rates)")
    out = np.empty((6, n))
    acc = np.empty((3, n))
    t = t_first
    for k in range(n):
        out[:, k] = y
        acc[:, k] = rhs(t, *y)
        if k == n - 1:
            break
        x, z, th, vx, vz, vt = y
        for _ in range(n_sub):
            a1 = rhs(t, x, z, th, vx, vz, vt)
            hh = 0.5 * h
            a2 = rhs(t + hh, x + hh * vx, z + hh * vz, th + hh * vt,
                     vx + hh * a1[0], vz + hh * a1[1], vt + hh * a1[2])
            v2 = (vx + hh * a1[0], vz + hh * a1[1], vt + hh * a1[2])
            a3 = rhs(t + hh, x + hh * v2[0], z + hh * v2[1], th + hh * v2[2],
                     vx + hh * a2[0], vz + hh * a2[1], vt + hh * a2[2])
            v3 = (vx + hh * a2[0], vz + hh * a2[1], vt + hh * a2[2])
            a4 = rhs(t + h, x + h * v3[0], z + h * v3[1], th + h * v3[2],
                     vx + h * a3[0], vz + h * a3[1], vt + h * a3[2])
            v4 = (vx + h * a3[0], vz + h * a3[1], vt + h * a3[2])
            x += h / 6 * (vx + 2 * v2[0] + 2 * v3[0] + v4[0])
            z += h / 6 * (vz + 2 * v2[1] + 2 * v3[1] + v4[1])
            th += h / 6 * (vt + 2 * v2[2] + 2 * v3[2] + v4[2])
            vx += h / 6 * (a1[0] + 2 * a2[0] + 2 * a3[0] + a4[0])
            vz += h / 6 * (a1[1] + 2 * a2[1] + 2 * a3[1] + a4[1])
            vt += h / 6 * (a1[2] + 2 * a2[2] + 2 * a3[2] + a4[2])
            t += h
        if not (abs(x) < lim_x and abs(z) < lim_z and abs(th) < lim_t):
            raise UnstableIntegration(f"state left its bounds at t={t:.3f} s: x={x}, z={z}, theta={th}")
        y = [x, z, th, vx, vz, vt]
        t = t_first + (k + 1) * dt

    if pitch_acc_from_rate:
        acc[2] = _fourth_order_derivative(out[5], dt)
    bow, stern = params.tensions(out[0])
    data = np.vstack([out, acc, bow, stern])
    probes = wave.data.copy()
    if noise:
        rng = np.random.default_rng(seed)
        for i, name in enumerate(STATE_CHANNELS):
            sd = noise.get(name, 0.0)
            if sd:
                data[i] += rng.normal(0.0, sd, n)
        for i, name in enumerate(PROBE_CHANNELS):
            sd = noise.get(name, 0.0)
            if sd:
                probes[i] += rng.normal(0.0, sd, n)
    state = TimeSeries(STATE_CHANNELS, wave.t0, dt, data)
    return SimOutput(state, wave.with_data(probes))


# campaigns -------------------------------------------------------------
@dataclass(frozen=True)
class Scenario:
    """One tank run. ``kind`` is ``"irregular"`` or ``"regular"``."""

    name: str
    kind: str
    seed: int
    duration: float
    dt: float = 0.01
    hs: float = 0.15
    tp: float = 2.12
    n_w: int = 100
    f_min: float = 0.28
    f_max: float = 1.13
    height: float = 0.10
    wavelength_ratio: float = 2.0
    model_length: float = 1.40
    spinup: float = 30.0
    amplitude_convention: str = "standard"

    def __post_init__(self):
        if self.kind not in ("irregular", "regular"):
            raise DataError(f"unknown wave kind {self.kind!r}")
        if self.duration <= 0 or self.dt <= 0 or self.spinup < 0:
            raise DataError(f"scenario {self.name!r}: durations must be positive")

    def wave(self) -> IrregularWave | RegularWave:
        if self.kind == "irregular":
            seq = np.random.SeedSequence(self.seed).spawn(1)[0]
            return irregular_components(PmSpectrum(self.hs, self.tp), self.n_w,
                                        (self.f_min, self.f_max),
                                        int(seq.generate_state(1)[0]),
                                        self.amplitude_convention)
        return RegularWave(self.height, self.wavelength_ratio, self.model_length)

    def celerity(self) -> float:
        """Speed used to move the elevation from the cog probe to the hull."""
        if self.kind == "regular":
            return self.wave().phase_velocity
        return G * self.tp / (2 * math.pi)

    def to_dict(self) -> dict:
        return asdict(self)


def tank_campaign(seed: int = 0, irregular_duration: float = 210.0,
                   regular_duration: float = 60.0) -> list[Scenario]:
    """Three P-M irregular runs plus the three regular wavelengths."""
    runs = [Scenario(f"irregular_{i + 1}", "irregular", seed + i + 1, irregular_duration)
            for i in range(3)]
    runs += [Scenario(f"regular_{r:g}", "regular", seed + 10 + i, regular_duration,
                      wavelength_ratio=r) for i, r in enumerate((1.5, 2.0, 3.0))]
    return runs


def run_scenario(params: VesselParams, sc: Scenario, geom: ProbeGeometry,
                 noise: dict[str, float] | None = None,
                 dt_internal: float | None = None) -> SimOutput:
    total = sc.spinup + sc.duration
    probes = probe_signals(sc.wave(), geom, total, sc.dt)
    seq = np.random.SeedSequence(sc.seed).spawn(2)[1]
    sim = simulate(params, probes, sc.celerity(), dt_internal=dt_internal,
                   seed=int(seq.generate_state(1)[0]), noise=noise, x0=geom.x0,
                   ramp=min(10.0, 0.5 * sc.spinup))
    k = round_half_away(sc.spinup / sc.dt)
    n = round_half_away(sc.duration / sc.dt)
    state = sim.state.window(k, k + n)
    inp = sim.input.window(k, k + n)
    return SimOutput(replace(state, t0=0.0), replace(inp, t0=0.0))


def export_campaign(params: VesselParams, scenarios: Sequence[Scenario], directory: str | Path,
                    geom: ProbeGeometry | None = None,
                    noise: dict[str, float] | None = None) -> Path:
    """Simulate every scenario and write ``<name>_state.csv``/``<name>_input.csv``
    plus ``manifest.json``."""
    geom = geom or ProbeGeometry()
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    noise = DEFAULT_NOISE if noise is None else noise
    runs = []
    for sc in scenarios:
        sim = run_scenario(params, sc, geom, noise)
        save_csv(sim.state, directory / f"{sc.name}_state.csv")
        save_csv(sim.input, directory / f"{sc.name}_input.csv")
        runs.append({"name": sc.name, "kind": sc.kind, "scenario": sc.to_dict(),
                     "state": f"{sc.name}_state.csv", "input": f"{sc.name}_input.csv"})
    manifest = {"version": "campaign/1", "vessel": params.to_dict(),
                "geometry": asdict(geom), "noise": dict(noise), "runs": runs}
    (directory / "manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True),
                                             encoding="utf-8")
    return directory
