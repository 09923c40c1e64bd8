"""Command-line entry point.

Exit codes: 0 success, 1 data error, 2 configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import experiment as ex
from .config import OUT_ENV, load_config
from .errors import ConfigError, DataError, HdmdcError, NumericalError
from .timeseries import save_csv

log = logging.getLogger("hdmdc")


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, type=Path, help="experiment TOML file")
    common.add_argument("--out", type=Path, default=None,
                        help=f"output root (overrides the config and ${OUT_ENV})")
    common.add_argument("--jobs", type=int, default=1, help="worker processes")
    common.add_argument("--seed-offset", type=int, default=0,
                        help="added to every seed in the config")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="hdmdc", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="generate the synthetic tank campaign")
    sub.add_parser("fit", parents=[common], help="fit deterministic models, draw ensemble priors")
    sub.add_parser("evaluate", parents=[common], help="run the train x test evaluation grid")
    sub.add_parser("report", parents=[common], help="summarize an evaluated report directory")
    sub.add_parser("run", parents=[common], help="simulate, fit, evaluate and report")
    pr = sub.add_parser("predict", parents=[common], help="predict one run with a saved model")
    pr.add_argument("--model", required=True, type=Path, help="model JSON written by 'fit'")
    pr.add_argument("--run", required=True, help="campaign run name, e.g. irregular_1")
    pr.add_argument("--start", required=True, type=float, help="time of the first predicted sample [s]")
    pr.add_argument("--horizon", type=float, default=None, help="prediction length [s]")
    pr.add_argument("--output", type=Path, default=None, help="CSV destination")
    return p


def _report(root: Path) -> None:
    report = root / "report"
    if not (report / "metrics.csv").exists():
        raise DataError(f"no evaluation results in {report}; run 'evaluate' first")
    summary = ex.summarize(report)
    (report / "summary.json").write_text(json.dumps(summary, indent=1, sort_keys=True) + "\n",
                                         encoding="utf-8")
    print(ex.format_summary(summary))


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config).with_seed_offset(args.seed_offset)
        if args.jobs < 1:
            raise ConfigError("--jobs must be at least 1")
        root = args.out or cfg.output
        root.mkdir(parents=True, exist_ok=True)
        if args.command == "simulate":
            print(ex.simulate_campaign(cfg, root))
        elif args.command == "fit":
            print(ex.fit_stage(cfg, root))
        elif args.command == "evaluate":
            print(ex.evaluate_stage(cfg, root, args.jobs))
        elif args.command == "report":
            _report(root)
        elif args.command == "run":
            ex.run_all(cfg, root, args.jobs)
            _report(root)
        elif args.command == "predict":
            pred = ex.predict_run(cfg, root, args.model, args.run, args.start, args.horizon)
            dest = args.output or root / "predictions" / f"{args.run}_{args.model.stem}.csv"
            dest.parent.mkdir(parents=True, exist_ok=True)
            save_csv(pred, dest)
            print(dest)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except (HdmdcError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
