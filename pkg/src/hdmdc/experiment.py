"""End-to-end experiment: campaign generation, identification, evaluation and reporting.

Directory layout under the output root::

    campaign/   raw runs (<name>_state.csv, <name>_input.csv, manifest.json)
    models/     preprocessing.json, windows.json, det_XX.json, draws.json
    report/     metrics.csv, eps_<class>.csv, series/, pdf_bands.csv, jsd.csv,
                ensemble.json, summary.json, run.json
"""
from __future__ import annotations

import json
import logging
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .config import CampaignConfig, ExperimentConfig
from .ensemble import PriorSpec, band, fit_members, predict_members, sample_priors
from .errors import DataError, HdmdcError, NumericalError
from .estimator import HdmdcModel, HyperParams, estimate_encounter_period, fit, horizon_steps, predict_many
from .metrics import ammae_per_channel, eps_t, nrmse_per_channel
from .resampling import BootstrapSpec, jsd_band, pdf_band, shared_grid
from .timeseries import TimeSeries, Window, decimate, decimation_factor, draw_windows, load_csv
from .vessel import DEFAULT_NOISE, LOAD_CHANNELS, MOTION_CHANNELS, Scenario, VesselParams, export_campaign
from .waves import ProbeGeometry, delay_correct, effective_celerity

log = logging.getLogger(__name__)

INPUT_CHANNELS = ("eta_fwd", "eta_cog")
WAVE_CLASSES = ("irregular", "regular")
MODEL_KINDS = ("deterministic", "bayesian")
FLOAT_FMT = "{:.10g}"


def _fmt(v) -> str:
    return "" if v is None else FLOAT_FMT.format(v)


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=1, sort_keys=True) + "\n", encoding="utf-8")


def _write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    lines = [",".join(header)]
    lines += [",".join(c if isinstance(c, str) else _fmt(c) for c in r) for r in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


# campaign --------------------------------------------------------------
def scenarios(cc: CampaignConfig) -> list[Scenario]:
    common = dict(dt=cc.dt, hs=cc.hs, tp=cc.tp, n_w=cc.n_w, f_min=cc.f_min, f_max=cc.f_max,
                  spinup=cc.spinup, amplitude_convention=cc.amplitude_convention)
    runs = [Scenario(f"irregular_{i + 1}", "irregular", cc.seed + i + 1, cc.irregular_duration,
                     **common) for i in range(cc.irregular_runs)]
    runs += [Scenario(f"regular_{r:g}", "regular", cc.seed + 1000 + i, cc.regular_duration,
                      height=cc.regular_height, wavelength_ratio=r, **common)
             for i, r in enumerate(cc.regular_ratios)]
    return runs


def vessel_params(cc: CampaignConfig) -> VesselParams:
    base = VesselParams().to_dict()
    unknown = set(cc.vessel) - set(base)
    if unknown:
        raise DataError(f"unknown vessel parameter(s): {', '.join(sorted(unknown))}")
    base.update(cc.vessel)
    return VesselParams.from_dict(base)


def simulate_campaign(cfg: ExperimentConfig, root: Path) -> Path:
    cc = cfg.campaign
    noise = {k: v * cc.noise_scale for k, v in DEFAULT_NOISE.items()}
    return export_campaign(vessel_params(cc), scenarios(cc), root / "campaign", noise=noise)


@dataclass(frozen=True)
class Run:
    name: str
    kind: str
    state: TimeSeries
    input: TimeSeries


def load_campaign(directory: Path) -> list[Run]:
    manifest_path = directory / "manifest.json"
    if not manifest_path.exists():
        raise DataError(f"no campaign at {directory}; run 'simulate' first")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    return [Run(r["name"], r["kind"], load_csv(directory / r["state"]),
                load_csv(directory / r["input"])) for r in manifest["runs"]]


# preprocessing ---------------------------------------------------------
@dataclass(frozen=True)
class Preprocessing:
    period: float
    celerity: float
    factor: int
    dt: float
    steps_per_period: int
    x0: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "Preprocessing":
        return cls(**d)


def estimate_preprocessing(runs: Sequence[Run], steps_per_period: int,
                           geom: ProbeGeometry | None = None) -> Preprocessing:
    """Celerity from the probe pair and encounter period from the corrected
    elevation, both on the irregular (training) runs only."""
    geom = geom or ProbeGeometry()
    irr = [r for r in runs if r.kind == "irregular"]
    if not irr:
        raise DataError("campaign has no irregular runs")
    cs = [effective_celerity(r.input.select(["eta_fwd_kn"]), r.input.select(["eta_cog_kn"]), geom)
          for r in irr]
    c = float(np.mean(cs))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        cog = [delay_correct(r.input.select(["eta_cog_kn"]), r.state.select(["x"]), c, geom.x0)
               for r in irr]
    period = estimate_encounter_period(cog)
    dt = irr[0].state.dt
    factor = decimation_factor(dt, steps_per_period, period)
    return Preprocessing(period, c, factor, dt * factor, steps_per_period, geom.x0)


def prepare(run: Run, prep: Preprocessing) -> tuple[TimeSeries, TimeSeries]:
    """Delay-correct the probe signals to the hull, then decimate both series."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        u = delay_correct(run.input, run.state.select(["x"]), prep.celerity, prep.x0)
    u = u.with_data(u.data, INPUT_CHANNELS)
    return (decimate(run.state, prep.steps_per_period, prep.period),
            decimate(u, prep.steps_per_period, prep.period))


# identification --------------------------------------------------------
def deterministic_hyper(cfg: ExperimentConfig, period: float) -> HyperParams:
    i = cfg.identification
    return HyperParams(i.l_tr * period, i.l_dx * period, i.l_du * period, i.lam)


def prior_spec(cfg: ExperimentConfig, period: float) -> PriorSpec:
    p = cfg.identification.prior
    T = period
    return PriorSpec((p.l_tr[0] * T, p.l_tr[1] * T), (p.l_dx[0] * T, p.l_dx[1] * T),
                     (p.l_du[0] * T, p.l_du[1] * T), p.lam, p.n_samples, p.seed)


def _sizes(cfg: ExperimentConfig, prep: Preprocessing) -> tuple[int, int]:
    """(training window length, warm-up length) in samples, covering every draw."""
    need, warm = 0, 0
    for h in (deterministic_hyper(cfg, prep.period), prior_spec(cfg, prep.period).upper()):
        m, s, z = h.counts(prep.dt)
        need = max(need, max(s, z) + m)
        warm = max(warm, max(s, z) + 1)
    return need, warm


def _seeds(cfg: ExperimentConfig) -> list[int]:
    children = np.random.SeedSequence(cfg.evaluation.seed).spawn(3)
    return [int(c.generate_state(1)[0]) for c in children]


@dataclass
class Context:
    """Everything derived from the campaign that the stages share."""

    cfg: ExperimentConfig
    runs: list[Run]
    prep: Preprocessing
    data: dict[str, list[tuple[TimeSeries, TimeSeries]]]

    @classmethod
    def build(cls, cfg: ExperimentConfig, root: Path, prep: Preprocessing | None = None):
        runs = load_campaign(root / "campaign")
        if prep is None:
            prep = estimate_preprocessing(runs, cfg.identification.steps_per_period)
        data = {k: [prepare(r, prep) for r in runs if r.kind == k] for k in WAVE_CLASSES}
        return cls(cfg, runs, prep, data)

    def train_windows(self) -> list[Window]:
        e = self.cfg.evaluation
        need, _ = _sizes(self.cfg, self.prep)
        lengths = [x.n_samples for x, _ in self.data["irregular"]]
        return draw_windows(lengths, need, e.n_train, _seeds(self.cfg)[0], (0.0, e.train_fraction))

    def horizon(self, kind: str) -> int:
        e = self.cfg.evaluation
        periods = e.horizon_irregular if kind == "irregular" else e.horizon_regular
        return horizon_steps(periods * self.prep.period, self.prep.dt)

    def test_windows(self, kind: str) -> list[Window]:
        e = self.cfg.evaluation
        _, warm = _sizes(self.cfg, self.prep)
        pool = self.data[kind]
        if not pool:
            raise DataError(f"no {kind} runs to test on")
        lengths = [x.n_samples for x, _ in pool]
        region = (e.train_fraction, 1.0) if kind == "irregular" else (0.0, 1.0)
        seed = _seeds(self.cfg)[1 if kind == "irregular" else 2]
        return draw_windows(lengths, warm + self.horizon(kind), e.n_test, seed, region)

    def training_data(self, w: Window) -> tuple[TimeSeries, TimeSeries]:
        x, u = self.data["irregular"][w.run]
        return x.window(w.start, w.start + w.length), u.window(w.start, w.start + w.length)

    def test_case(self, kind: str, w: Window):
        """(input, warm-up history, reference) for one test window."""
        _, warm = _sizes(self.cfg, self.prep)
        x, u = self.data[kind][w.run]
        a, b = w.start, w.start + w.length
        return u.window(a, b), x.window(a, a + warm), x.window(a + warm, b)


def fit_stage(cfg: ExperimentConfig, root: Path) -> Path:
    ctx = Context.build(cfg, root)
    out = root / "models"
    out.mkdir(parents=True, exist_ok=True)
    hyper = deterministic_hyper(cfg, ctx.prep.period)
    windows = ctx.train_windows()
    for i, w in enumerate(windows):
        x, u = ctx.training_data(w)
        fit(x, u, hyper, cfg.identification.standardize).save(out / f"det_{i:02d}.json")
    spec = prior_spec(cfg, ctx.prep.period)
    _write_json(out / "draws.json", {"prior": spec.to_dict(),
                                     "draws": [h.to_dict() for h in sample_priors(spec)]})
    _write_json(out / "windows.json", {"train": [w._asdict() for w in windows]})
    _write_json(out / "preprocessing.json", ctx.prep.to_dict())
    return out


# evaluation ------------------------------------------------------------
_CONTEXTS: dict[tuple, Context] = {}


def _context(cfg: ExperimentConfig, root: Path) -> Context:
    key = (repr(cfg), str(root))
    if key not in _CONTEXTS:
        prep = Preprocessing.from_dict(
            json.loads((root / "models" / "preprocessing.json").read_text(encoding="utf-8")))
        _CONTEXTS.clear()
        _CONTEXTS[key] = Context.build(cfg, root, prep)
    return _CONTEXTS[key]


def _safe_predict(model: HdmdcModel, cases, n: int):
    """Batch rollout, falling back to one case at a time to isolate failures."""
    try:
        return predict_many(model, cases, n), [None] * len(cases)
    except NumericalError:
        preds, errs = [], []
        for c in cases:
            try:
                preds.append(predict_many(model, [c], n)[0])
                errs.append(None)
            except NumericalError as exc:
                preds.append(None)
                errs.append(f"{type(exc).__name__}: {exc}")
        return preds, errs


def _cell_metrics(pred: TimeSeries, ref: TimeSeries, k: float) -> dict:
    nr = nrmse_per_channel(pred, ref, k)
    am = ammae_per_channel(pred, ref, k)
    names = ref.channel_names
    motion = [names.index(c) for c in MOTION_CHANNELS if c in names]
    return {
        "anrmse": float(nr.mean()), "nammae": float(am.mean()),
        "anrmse_motion": float(nr[motion].mean()) if motion else None,
        "nammae_motion": float(am[motion].mean()) if motion else None,
        "worst_variable": names[int(np.argmax(nr))],
        "nrmse": nr.tolist(), "ammae": am.tolist(),
        "eps": eps_t(pred, ref, k).data[0],
    }


def evaluate_train_window(cfg: ExperimentConfig, root: Path, i: int) -> dict:
    """Deterministic and Bayesian predictions of every test window from training window ``i``."""
    ctx = _context(cfg, root)
    k = cfg.identification.k
    models_dir = root / "models"
    det = HdmdcModel.load(models_dir / f"det_{i:02d}.json")
    draws = [HyperParams.from_dict(d) for d in
             json.loads((models_dir / "draws.json").read_text(encoding="utf-8"))["draws"]]
    windows = [Window(**w) for w in
               json.loads((models_dir / "windows.json").read_text(encoding="utf-8"))["train"]]
    x, u = ctx.training_data(windows[i])
    members, fit_failures = fit_members(x, u, draws, cfg.identification.standardize)

    result = {"train": i, "cells": [], "series": {}, "member_anrmse": {}, "failures": {}}
    keep = {(r, t) for r, t in cfg.evaluation.selected if r == i}
    for kind in WAVE_CLASSES:
        tests = ctx.test_windows(kind)
        n = ctx.horizon(kind)
        cases, refs = [], []
        for w in tests:
            inp, hist, ref = ctx.test_case(kind, w)
            cases.append((inp, hist))
            refs.append(ref)
        det_preds, det_errs = _safe_predict(det, cases, n)
        try:
            ens = predict_members(members, draws, cases, n, fit_failures)
            ens_err = None
            result["failures"][kind] = [list(f) for f in ens[0].failures]
        except HdmdcError as exc:
            ens, ens_err = None, f"{type(exc).__name__}: {exc}"
            result["failures"][kind] = ens_err

        member_scores = []
        for t, ref in enumerate(refs):
            outcomes = {"deterministic": (det_preds[t], det_errs[t]),
                        "bayesian": (ens[t].mean if ens else None, ens_err)}
            for kind_m, (pred, err) in outcomes.items():
                cell = {"wave_class": kind, "model": kind_m, "train": i, "test": t,
                        "run": tests[t].run, "start": tests[t].start}
                if pred is None:
                    cell.update(status="failed", error=err)
                else:
                    try:
                        cell.update(status="ok", error="", **_cell_metrics(pred, ref, k))
                    except HdmdcError as exc:
                        cell.update(status="failed", error=f"{type(exc).__name__}: {exc}")
                result["cells"].append(cell)
            if ens:
                arr = ens[t].member_array()
                sd = k * ref.data.std(axis=1, ddof=1)
                member_scores.append(
                    (np.sqrt(((arr - ref.data) ** 2).mean(axis=2)) / sd).mean(axis=1))
            jsd_pair = kind == "irregular" and (
                cfg.evaluation.jsd_cells == "all" or t % cfg.evaluation.n_train == i)
            if (i, t) in keep or jsd_pair:
                entry = {"ref": ref, "det": det_preds[t]}
                if ens:
                    lo, hi = band(ens[t], cfg.evaluation.coverage)
                    entry.update(mean=ens[t].mean, std=ens[t].std, lo=lo, hi=hi)
                entry["selected"] = (i, t) in keep
                entry["jsd"] = jsd_pair
                result["series"][(kind, t)] = entry
        if member_scores:
            result["member_anrmse"][kind] = np.mean(member_scores, axis=0).tolist()
    return result


def _stats_task(args):
    name, efd, pred, bcfg, seed = args
    spec = BootstrapSpec(bcfg.n_resamples, seed)
    grid = shared_grid(efd, pred)
    a = pdf_band(efd, spec, bcfg.coverage, grid)
    b = pdf_band(pred, spec, bcfg.coverage, grid)
    j = jsd_band(efd, pred, spec, bcfg.coverage, grid)
    return name, grid, a, b, j


def _map(fn, tasks, jobs: int):
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(min(jobs, len(tasks))) as pool:
            return list(pool.map(fn, tasks))
    return [fn(t) for t in tasks]


def _train_task(args):
    cfg, root, i = args
    return evaluate_train_window(cfg, root, i)


def evaluate_stage(cfg: ExperimentConfig, root: Path, jobs: int = 1) -> Path:
    ctx = _context(cfg, root)
    out = root / "report"
    (out / "series").mkdir(parents=True, exist_ok=True)
    e = cfg.evaluation
    results = _map(_train_task, [(cfg, root, i) for i in range(e.n_train)], jobs)
    results.sort(key=lambda r: r["train"])
    names = MOTION_CHANNELS + LOAD_CHANNELS
    state_names = ctx.data["irregular"][0][0].channel_names

    # metrics table, sorted by cell
    order = {k: n for n, k in enumerate(WAVE_CLASSES)}
    morder = {k: n for n, k in enumerate(MODEL_KINDS)}
    cells = [c for r in results for c in r["cells"]]
    cells.sort(key=lambda c: (order[c["wave_class"]], morder[c["model"]], c["train"], c["test"]))
    header = ["wave_class", "model", "train", "test", "run", "start", "status", "error",
              "anrmse", "nammae", "anrmse_motion", "nammae_motion", "worst_variable"]
    header += [f"nrmse_{c}" for c in state_names] + [f"ammae_{c}" for c in state_names]
    rows = []
    for c in cells:
        ok = c["status"] == "ok"
        row = [c["wave_class"], c["model"], str(c["train"]), str(c["test"]), str(c["run"]),
               str(c["start"]), c["status"], c["error"].replace(",", ";")]
        row += [c.get("anrmse"), c.get("nammae"), c.get("anrmse_motion"), c.get("nammae_motion"),
                c.get("worst_variable", "")]
        row += (c["nrmse"] + c["ammae"]) if ok else [None] * (2 * len(state_names))
        rows.append(row)
    _write_csv(out / "metrics.csv", header, rows)

    # time-resolved error traces, one file per wave class
    for kind in WAVE_CLASSES:
        ks = [c for c in cells if c["wave_class"] == kind and c["status"] == "ok"]
        n = ctx.horizon(kind)
        t = [(j + 1) * ctx.prep.dt for j in range(n)]
        _write_csv(out / f"eps_{kind}.csv", ["model", "train", "test"] + [f"{v:.6g}" for v in t],
                   [[c["model"], str(c["train"]), str(c["test"])] + list(c["eps"]) for c in ks])

    # selected time series
    series = {}
    for r in results:
        for (kind, t), entry in r["series"].items():
            series[(kind, r["train"], t)] = entry
    for (kind, i, t), entry in sorted(series.items()):
        if not entry["selected"]:
            continue
        ref = entry["ref"]
        cols = {"efd": ref, "det": entry["det"], "bayes_mean": entry.get("mean"),
                "bayes_std": entry.get("std"), "bayes_lo": entry.get("lo"),
                "bayes_hi": entry.get("hi")}
        header = ["t"]
        data = [ref.times]
        for ch in state_names:
            for label, ts in cols.items():
                header.append(f"{ch}_{label}")
                data.append(ts.channel(ch) if ts is not None else np.full(ref.n_samples, np.nan))
        _write_csv(out / "series" / f"{kind}_train{i:02d}_test{t:02d}.csv", header,
                   np.column_stack(data).tolist())

    # distribution comparison on the irregular test set
    pairs = [v for (kind, i, t), v in sorted(series.items())
             if kind == "irregular" and v["jsd"] and v.get("mean") is not None]
    if pairs:
        efd = {c: np.concatenate([p["ref"].channel(c) for p in pairs]) for c in names}
        pred = {c: np.concatenate([p["mean"].channel(c) for p in pairs]) for c in names}
        bseed = e.bootstrap.seed
        tasks = [(c, efd[c], pred[c], e.bootstrap, bseed + n) for n, c in enumerate(names)]
        stats = _map(_stats_task, tasks, jobs)
        pdf_rows, jsd_rows = [], []
        for name, grid, a, b, j in stats:
            for src, pb in (("efd", a), ("bhdmdc", b)):
                for y, m, lo, hi in zip(grid, pb.mean.density, pb.lower.density, pb.upper.density):
                    pdf_rows.append([name, src, y, m, lo, hi])
            jsd_rows.append([name, j.ev, j.lower, j.upper, j.width])
        avg = np.mean([r[1:] for r in jsd_rows], axis=0).tolist()
        jsd_rows.append(["avg", *avg])
        _write_csv(out / "pdf_bands.csv", ["variable", "source", "y", "mean", "lower", "upper"],
                   pdf_rows)
        q_lo, q_hi = (1 - e.bootstrap.coverage) / 2, (1 + e.bootstrap.coverage) / 2
        _write_csv(out / "jsd.csv", ["variable", "EV", f"q={q_lo:g}", f"q={q_hi:g}", "U"], jsd_rows)

    # ensemble diagnostics
    draws = json.loads((root / "models" / "draws.json").read_text(encoding="utf-8"))
    _write_json(out / "ensemble.json", {
        "prior": draws["prior"], "draws": draws["draws"],
        "train_windows": {str(r["train"]): {"failures": r["failures"],
                                            "member_anrmse": r["member_anrmse"]}
                          for r in results},
    })

    det = HdmdcModel.load(root / "models" / "det_00.json")
    _write_json(out / "run.json", {
        "version": __version__, "config": cfg.to_dict() | {"output": ""},
        "preprocessing": ctx.prep.to_dict(),
        "deterministic_dims": asdict(det.dims),
        "horizon_steps": {k: ctx.horizon(k) for k in WAVE_CLASSES},
        "test_windows": {k: [w._asdict() for w in ctx.test_windows(k)] for k in WAVE_CLASSES},
    })
    _write_json(out / "summary.json", summarize(out))
    return out


# reporting -------------------------------------------------------------
def read_metrics(path: Path) -> list[dict]:
    lines = path.read_text(encoding="utf-8").splitlines()
    header = lines[0].split(",")
    return [dict(zip(header, line.split(","))) for line in lines[1:]]


def _box(values: np.ndarray) -> dict:
    if values.size == 0:
        return {"n": 0}
    q1, med, q3 = np.quantile(values, [0.25, 0.5, 0.75])
    return {"n": int(values.size), "median": float(med), "q1": float(q1), "q3": float(q3),
            "iqr": float(q3 - q1), "min": float(values.min()), "max": float(values.max()),
            "mean": float(values.mean())}


def eps_trend(path: Path) -> dict[tuple[str, int, int], float]:
    """Mean error over the last third of the horizon divided by the first third."""
    lines = path.read_text(encoding="utf-8").splitlines()
    out = {}
    for line in lines[1:]:
        parts = line.split(",")
        e = np.array(parts[3:], dtype=float)
        third = len(e) // 3
        out[(parts[0], int(parts[1]), int(parts[2]))] = float(e[-third:].mean() / e[:third].mean())
    return out


def summarize(report: Path) -> dict:
    rows = read_metrics(report / "metrics.csv")
    summary: dict = {}
    for kind in WAVE_CLASSES:
        summary[kind] = {}
        for model in MODEL_KINDS:
            sel = [r for r in rows if r["wave_class"] == kind and r["model"] == model]
            ok = [r for r in sel if r["status"] == "ok"]
            get = lambda key: np.array([float(r[key]) for r in ok])  # noqa: E731
            load_worst = sum(r["worst_variable"] in LOAD_CHANNELS for r in ok)
            entry = {
                "cells": len(sel), "failed": len(sel) - len(ok),
                "anrmse": _box(get("anrmse")), "nammae": _box(get("nammae")),
                "anrmse_motion": _box(get("anrmse_motion")),
                "load_worst_fraction": load_worst / len(ok) if ok else None,
            }
            eps_path = report / f"eps_{kind}.csv"
            if eps_path.exists():
                ratios = [v for (m, _, _), v in eps_trend(eps_path).items() if m == model]
                entry["eps_trend_max"] = max(ratios) if ratios else None
                entry["eps_trend_above_1.5"] = int(sum(v > 1.5 for v in ratios))
            summary[kind][model] = entry
    jsd_path = report / "jsd.csv"
    if jsd_path.exists():
        lines = jsd_path.read_text(encoding="utf-8").splitlines()
        summary["jsd"] = {p[0]: float(p[1]) for p in (ln.split(",") for ln in lines[1:])}
    return summary


def format_summary(summary: dict) -> str:
    out = []
    for kind in WAVE_CLASSES:
        for model in MODEL_KINDS:
            s = summary[kind][model]
            a, m = s["anrmse"], s["anrmse_motion"]
            if not a.get("n"):
                out.append(f"{kind:9s} {model:13s} no successful cells ({s['failed']} failed)")
                continue
            out.append(
                f"{kind:9s} {model:13s} ANRMSE median {a['median']:.3f} IQR {a['iqr']:.3f} | "
                f"motion median {m['median']:.3f} | NAMMAE median {s['nammae']['median']:.3f} | "
                f"load worst {100 * s['load_worst_fraction']:.0f}% | failed {s['failed']}")
    if "jsd" in summary:
        out.append("JSD EV: " + " ".join(f"{k}={v:.4f}" for k, v in summary["jsd"].items()))
    return "\n".join(out)


def run_all(cfg: ExperimentConfig, root: Path, jobs: int = 1) -> Path:
    simulate_campaign(cfg, root)
    fit_stage(cfg, root)
    return evaluate_stage(cfg, root, jobs)


def predict_run(cfg: ExperimentConfig, root: Path, model_path: Path, run_name: str,
                start: float, horizon: float | None = None) -> TimeSeries:
    """Predict ``horizon`` seconds of run ``run_name`` starting at time ``start``.

    The warm-up history is the model's own delay span immediately before
    ``start``; the measured input is used throughout.
    """
    prep = Preprocessing.from_dict(
        json.loads((root / "models" / "preprocessing.json").read_text(encoding="utf-8")))
    runs = {r.name: r for r in load_campaign(root / "campaign")}
    if run_name not in runs:
        raise DataError(f"unknown run {run_name!r}; have {', '.join(sorted(runs))}")
    x, u = prepare(runs[run_name], prep)
    model = HdmdcModel.load(model_path)
    if not math.isclose(model.dt, x.dt):
        raise DataError("model and campaign sampling differ")
    horizon = cfg.evaluation.horizon_irregular * prep.period if horizon is None else horizon
    k = int(round((start - x.t0) / x.dt))
    d = model.dims
    lag = max(d.s, d.z)
    if k - 1 - lag < 0:
        raise DataError(f"start {start} s leaves less than {lag + 1} samples of history")
    hist = x.window(k - 1 - d.s, k)
    n = horizon_steps(horizon, x.dt)
    return predict_many(model, [(u, hist)], n)[0]
