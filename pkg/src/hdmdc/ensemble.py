"""Bayesian HDMDc: Monte Carlo ensembles over uniformly distributed hyperparameters.

Each draw of ``(l_tr, l_dx, l_du, lambda)`` gives one deterministic model;
the ensemble reports the pointwise mean and sample standard deviation of the
member predictions, plus empirical quantile bands.
"""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DataError, InvalidBounds, NumericalError, TooFewSurvivors
from .estimator import HdmdcModel, HyperParams, Prediction, fit, horizon_steps, predict_many
from .timeseries import TimeSeries

log = logging.getLogger(__name__)

FIELDS = ("l_tr", "l_dx", "l_du", "lam")


@dataclass(frozen=True)
class PriorSpec:
    """Independent uniform priors, one ``(lower, upper)`` pair per hyperparameter.

    ``lower == upper`` collapses a coordinate onto a single value.
    """

    l_tr: tuple[float, float]
    l_dx: tuple[float, float]
    l_du: tuple[float, float]
    lam: tuple[float, float]
    n_samples: int = 100
    rng_seed: int = 0

    def __post_init__(self):
        for name in FIELDS:
            lo, hi = map(float, getattr(self, name))
            if not (np.isfinite(lo) and np.isfinite(hi)) or lo > hi or lo < 0:
                raise InvalidBounds(f"{name}: invalid bounds ({lo}, {hi})")
            object.__setattr__(self, name, (lo, hi))
        if self.n_samples < 2:
            raise InvalidBounds("n_samples must be at least 2")

    @classmethod
    def around(cls, center: HyperParams, rel: float = 0.5, n_samples: int = 100,
               rng_seed: int = 0) -> "PriorSpec":
        """Intervals of +-``rel`` relative width centered on ``center``."""
        b = {f: (getattr(center, f) * (1 - rel), getattr(center, f) * (1 + rel)) for f in FIELDS}
        return cls(**b, n_samples=n_samples, rng_seed=rng_seed)

    @classmethod
    def defaults(cls, period: float, n_samples: int = 100, rng_seed: int = 0,
                       l_dx_upper: float = 1.5) -> "PriorSpec":
        """+-50% around the deterministic defaults; ``l_dx_upper`` in periods."""
        T = period
        return cls((10 * T, 30 * T), (0.5 * T, l_dx_upper * T), (2.5 * T, 7.5 * T), (50.0, 150.0),
                   n_samples, rng_seed)

    def upper(self) -> HyperParams:
        return HyperParams(*(getattr(self, f)[1] for f in FIELDS))

    def to_dict(self) -> dict:
        d = {f if f != "lam" else "lambda": list(getattr(self, f)) for f in FIELDS}
        d.update(n_samples=self.n_samples, rng_seed=self.rng_seed)
        return d


def sample_priors(spec: PriorSpec) -> list[HyperParams]:
    """Draw ``n_samples`` hyperparameter sets.

    Draw ``i`` comes from its own stream keyed by ``(rng_seed, i)``, so the
    first ``n`` draws do not depend on ``n_samples``.
    """
    lo = np.array([getattr(spec, f)[0] for f in FIELDS])
    hi = np.array([getattr(spec, f)[1] for f in FIELDS])
    draws = []
    for i in range(spec.n_samples):
        u = np.random.default_rng([spec.rng_seed, i]).uniform(size=len(FIELDS))
        draws.append(HyperParams(*(lo + u * (hi - lo)).tolist()))
    return draws


@dataclass(frozen=True)
class EnsemblePrediction:
    mean: TimeSeries
    std: TimeSeries
    members: list[Prediction]
    draws: list[HyperParams]
    failures: list[tuple[int, str]] = field(default_factory=list)

    @property
    def n_members(self) -> int:
        return len(self.members)

    def member_array(self) -> np.ndarray:
        """``(members, channels, samples)`` stack of member trajectories."""
        return np.stack([p.series.data for p in self.members])


def aggregate(members: Sequence[Prediction], draws: Sequence[HyperParams],
              failures: Sequence[tuple[int, str]] = ()) -> EnsemblePrediction:
    """Pointwise mean and sample standard deviation (``ddof=1``) across members."""
    if len(members) < 2:
        raise TooFewSurvivors(f"{len(members)} member(s) succeeded, need at least 2")
    ref = members[0].series
    arr = np.stack([p.series.data for p in members])
    # moments taken relative to the first member, so identical members give
    # back their value and a zero spread exactly
    dev = arr - arr[0]
    mean = arr[0] + dev.mean(axis=0)
    std = dev.std(axis=0, ddof=1)
    return EnsemblePrediction(ref.with_data(mean), ref.with_data(std), list(members),
                              list(draws), list(failures))


def band(ep: EnsemblePrediction, coverage: float = 0.95) -> tuple[TimeSeries, TimeSeries]:
    """Pointwise empirical quantiles at ``(1 -+ coverage)/2`` (linear interpolation)."""
    if not 0 <= coverage < 1:
        raise DataError("coverage must lie in [0, 1)")
    if ep.n_members < 2:
        raise TooFewSurvivors("band needs at least two members")
    lo, hi = np.quantile(ep.member_array(), [(1 - coverage) / 2, (1 + coverage) / 2], axis=0)
    return ep.mean.with_data(lo), ep.mean.with_data(hi)


def sigma_band(ep: EnsemblePrediction, k: float = 1.96) -> tuple[TimeSeries, TimeSeries]:
    m, s = ep.mean.data, ep.std.data
    return ep.mean.with_data(m - k * s), ep.mean.with_data(m + k * s)


# fitting and prediction ------------------------------------------------
def _fit_member(args):
    i, state, input, hyper, standardize = args
    try:
        return i, fit(state, input, hyper, standardize), None
    except NumericalError as exc:
        return i, None, f"{type(exc).__name__}: {exc}"


def fit_members(state: TimeSeries, input: TimeSeries, draws: Sequence[HyperParams],
                standardize: bool = True, jobs: int = 1):
    """Fit one model per draw; returns ``(models, failures)`` with ``None`` for failures."""
    tasks = [(i, state, input, h, standardize) for i, h in enumerate(draws)]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            results = list(pool.map(_fit_member, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        results = [_fit_member(t) for t in tasks]
    models: list[HdmdcModel | None] = [None] * len(draws)
    failures = []
    for i, model, err in results:
        models[i] = model
        if err is not None:
            failures.append((i, err))
            log.info("ensemble member %d failed: %s", i, err)
    return models, failures


def predict_members(models: Sequence[HdmdcModel | None], draws: Sequence[HyperParams],
                    cases: Sequence[tuple[TimeSeries, TimeSeries]], n_steps: int,
                    failures: Sequence[tuple[int, str]] = ()) -> list[EnsemblePrediction]:
    """Ensemble predictions for several ``(input, history)`` cases at once.

    Members whose rollout blows up are treated like failed fits.
    """
    per_case: list[list[Prediction]] = [[] for _ in cases]
    kept: list[HyperParams] = []
    failures = list(failures)
    for i, (model, h) in enumerate(zip(models, draws)):
        if model is None:
            continue
        try:
            outs = predict_many(model, cases, n_steps)
        except NumericalError as exc:
            failures.append((i, f"{type(exc).__name__}: {exc}"))
            continue
        kept.append(h)
        for c, (ts, (_, hist)) in enumerate(zip(outs, cases)):
            per_case[c].append(Prediction(ts, (hist.t0, hist.t0 + (hist.n_samples - 1) * hist.dt)))
    failures.sort()
    return [aggregate(p, kept, failures) for p in per_case]


def fit_predict_ensemble(state: TimeSeries, input: TimeSeries, test_input: TimeSeries,
                         warmup: TimeSeries, spec: PriorSpec, horizon: float,
                         standardize: bool = True, jobs: int = 1) -> EnsemblePrediction:
    """Fit one model per prior draw on (``state``, ``input``) and predict the
    ``horizon`` seconds following ``warmup``.

    ``warmup`` must hold at least ``s + 1`` snapshots for the largest drawn
    ``s``, and ``test_input`` must cover ``z`` samples before its end for the
    largest ``z``.
    """
    draws = sample_priors(spec)
    models, failures = fit_members(state, input, draws, standardize, jobs)
    n = horizon_steps(horizon, state.dt)
    return predict_members(models, draws, [(test_input, warmup)], n, failures)[0]
