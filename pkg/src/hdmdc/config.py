"""Experiment configuration (TOML).

Lengths in ``[identification]`` and horizons in ``[evaluation]`` are given in
units of the estimated encounter period, since that period is only known once
the training data has been processed. Every random seed must be spelled out.
"""
from __future__ import annotations

import os
import sys
from dataclasses import MISSING, asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any

from .errors import ConfigError

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

OUT_ENV = "HDMDC_OUT"


@dataclass(frozen=True)
class CampaignConfig:
    seed: int
    irregular_runs: int = 3
    irregular_duration: float = 210.0
    regular_ratios: tuple[float, ...] = (1.5, 2.0, 3.0)
    regular_duration: float = 60.0
    regular_height: float = 0.10
    dt: float = 0.01
    hs: float = 0.15
    tp: float = 2.12
    n_w: int = 100
    f_min: float = 0.28
    f_max: float = 1.13
    spinup: float = 30.0
    amplitude_convention: str = "standard"
    noise_scale: float = 1.0
    vessel: dict = field(default_factory=dict)


@dataclass(frozen=True)
class PriorConfig:
    seed: int
    l_tr: tuple[float, float] = (10.0, 30.0)
    l_dx: tuple[float, float] = (0.5, 1.5)
    l_du: tuple[float, float] = (2.5, 7.5)
    lam: tuple[float, float] = (50.0, 150.0)
    n_samples: int = 100


@dataclass(frozen=True)
class IdentificationConfig:
    prior: PriorConfig
    steps_per_period: int = 32
    l_tr: float = 20.0
    l_dx: float = 1.0
    l_du: float = 5.0
    lam: float = 100.0
    k: float = 1.0
    standardize: bool = True


@dataclass(frozen=True)
class BootstrapConfig:
    seed: int
    n_resamples: int = 100
    coverage: float = 0.95


@dataclass(frozen=True)
class EvaluationConfig:
    seed: int
    bootstrap: BootstrapConfig
    n_train: int = 10
    n_test: int = 10
    train_fraction: float = 0.5
    horizon_irregular: float = 15.0
    horizon_regular: float = 5.0
    coverage: float = 0.95
    selected: tuple[tuple[int, int], ...] = ((0, 0),)
    jsd_cells: str = "diagonal"


@dataclass(frozen=True)
class ExperimentConfig:
    campaign: CampaignConfig
    identification: IdentificationConfig
    evaluation: EvaluationConfig
    output: Path = Path("out")

    def with_seed_offset(self, offset: int) -> "ExperimentConfig":
        if not offset:
            return self
        c, i, e = self.campaign, self.identification, self.evaluation
        return replace(
            self,
            campaign=replace(c, seed=c.seed + offset),
            identification=replace(i, prior=replace(i.prior, seed=i.prior.seed + offset)),
            evaluation=replace(e, seed=e.seed + offset,
                               bootstrap=replace(e.bootstrap, seed=e.bootstrap.seed + offset)),
        )

    def to_dict(self) -> dict:
        d = asdict(self)
        d["output"] = str(self.output)
        return d


# parsing ---------------------------------------------------------------
_ALIASES = {"lambda": "lam"}
_NESTED = {
    (IdentificationConfig, "prior"): PriorConfig,
    (EvaluationConfig, "bootstrap"): BootstrapConfig,
}


def _coerce(value: Any, typ: Any, key: str) -> Any:
    t = typ if isinstance(typ, str) else getattr(typ, "__name__", str(typ))
    try:
        if t.startswith("tuple[tuple"):
            return tuple(tuple(int(v) for v in pair) for pair in value)
        if t.startswith("tuple[float, float]"):
            if len(value) != 2:
                raise ValueError("expected [lower, upper]")
            return (float(value[0]), float(value[1]))
        if t.startswith("tuple"):
            return tuple(float(v) for v in value)
        if t == "int":
            if isinstance(value, bool) or int(value) != value:
                raise ValueError("expected an integer")
            return int(value)
        if t == "float":
            if isinstance(value, bool):
                raise ValueError("expected a number")
            return float(value)
        if t == "bool":
            if not isinstance(value, bool):
                raise ValueError("expected true/false")
            return value
        if t == "str":
            if not isinstance(value, str):
                raise ValueError("expected a string")
            return value
        if t == "dict":
            if not isinstance(value, dict):
                raise ValueError("expected a table")
            return dict(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key}: {exc} (got {value!r})") from None
    return value


def _build(cls, table: dict, prefix: str):
    if not isinstance(table, dict):
        raise ConfigError(f"[{prefix}] must be a table")
    table = {_ALIASES.get(k, k): v for k, v in table.items()}
    known = {f.name: f for f in fields(cls)}
    unknown = sorted(set(table) - set(known))
    if unknown:
        raise ConfigError(f"unknown key(s) in [{prefix}]: {', '.join(unknown)}")
    kwargs = {}
    for name, f in known.items():
        key = f"{prefix}.{'lambda' if name == 'lam' else name}"
        nested = _NESTED.get((cls, name))
        if name not in table:
            if nested is not None or (f.default is MISSING and f.default_factory is MISSING):
                raise ConfigError(f"missing config key: {key}")
            continue
        if nested is not None:
            kwargs[name] = _build(nested, table[name], key)
        else:
            kwargs[name] = _coerce(table[name], f.type, key)
    return cls(**kwargs)


def parse_config(doc: dict) -> ExperimentConfig:
    for section in ("campaign", "identification", "evaluation"):
        if section not in doc:
            raise ConfigError(f"missing config key: {section}")
    extra = sorted(set(doc) - {"campaign", "identification", "evaluation", "output"})
    if extra:
        raise ConfigError(f"unknown top-level section(s): {', '.join(extra)}")
    out = doc.get("output", {})
    if not isinstance(out, dict) or set(out) - {"directory"}:
        raise ConfigError("[output] accepts only 'directory'")
    directory = os.environ.get(OUT_ENV) or out.get("directory", "out")
    cfg = ExperimentConfig(
        _build(CampaignConfig, doc["campaign"], "campaign"),
        _build(IdentificationConfig, doc["identification"], "identification"),
        _build(EvaluationConfig, doc["evaluation"], "evaluation"),
        Path(directory),
    )
    _validate(cfg)
    return cfg


def _validate(cfg: ExperimentConfig) -> None:
    c, i, e = cfg.campaign, cfg.identification, cfg.evaluation
    if c.irregular_runs < 1:
        raise ConfigError("campaign.irregular_runs must be at least 1")
    if c.amplitude_convention not in ("standard", "4pi"):
        raise ConfigError("campaign.amplitude_convention must be 'standard' or '4pi'")
    if i.steps_per_period < 2:
        raise ConfigError("identification.steps_per_period must be at least 2")
    if e.n_train < 1 or e.n_test < 1:
        raise ConfigError("evaluation.n_train and evaluation.n_test must be positive")
    if e.jsd_cells not in ("diagonal", "all"):
        raise ConfigError("evaluation.jsd_cells must be 'diagonal' or 'all'")
    if not 0 < e.coverage < 1 or not 0 < e.bootstrap.coverage < 1:
        raise ConfigError("coverage values must lie in (0, 1)")
    for r, t in e.selected:
        if not (0 <= r < e.n_train and 0 <= t < e.n_test):
            raise ConfigError(f"evaluation.selected cell {(r, t)} is outside the grid")


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return parse_config(doc)
