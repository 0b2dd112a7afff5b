"""Command-line entry point.

    rmtstap run SCENARIO.toml --out results.csv
    rmtstap figures --paper-set --out-dir figs/
    rmtstap scenario fig3 > fig3.toml

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import harness
from .harness import ConfigError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

log = logging.getLogger("rmtstap")


def _apply_overrides(scenario, args):
    changes = {}
    if args.trials is not None:
        changes["n_trials"] = args.trials
    if args.seed is not None:
        changes["base_seed"] = args.seed
    return replace(scenario, **changes) if changes else scenario


def _run_one(scenario, out: Path, threads: int) -> None:
    t0 = time.perf_counter()
    rows = harness.run_scenario(scenario, threads=threads)
    harness.emit_csv(rows, out)
    log.info("%s: %d rows, %d trials, %.1fs -> %s", scenario.name, len(rows),
             scenario.n_trials, time.perf_counter() - t0, out)


def cmd_run(args) -> None:
    scenario = _apply_overrides(harness.load_scenario(args.scenario), args)
    _run_one(scenario, Path(args.out), args.threads)


def cmd_figures(args) -> None:
    if not args.paper_set:
        raise ConfigError("figures currently supports only --paper-set")
    out_dir = Path(args.out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create {out_dir}: {exc}") from exc
    for name, scenario in harness.bundled_scenarios().items():
        scenario = _apply_overrides(scenario, args)
        _run_one(scenario, out_dir / f"{name}.csv", args.threads)


def cmd_scenario(args) -> None:
    scenarios = harness.bundled_scenarios()
    if args.name not in scenarios:
        raise ConfigError(f"unknown scenario {args.name!r}; choose from {sorted(scenarios)}")
    sys.stdout.write(harness.dump_scenario(scenarios[args.name]))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rmtstap", description="RMT-corrected STAP Monte Carlo simulator")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--trials", type=int, help="override the number of trials")
        p.add_argument("--seed", type=int, help="override the base seed")
        p.add_argument("--threads", type=int, default=1, help="worker threads")

    p = sub.add_parser("run", help="run one scenario file")
    p.add_argument("scenario")
    p.add_argument("--out", required=True, help="CSV output path")
    common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("figures", help="run the bundled figure scenarios")
    p.add_argument("--paper-set", action="store_true", help="all bundled scenarios")
    p.add_argument("--out-dir", required=True)
    common(p)
    p.set_defaults(func=cmd_figures)

    p = sub.add_parser("scenario", help="print a bundled scenario as TOML")
    p.add_argument("name")
    p.set_defaults(func=cmd_scenario)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    if getattr(args, "threads", 1) is not None and getattr(args, "threads", 1) < 1:
        log.error("--threads must be >= 1")
        return EXIT_CONFIG
    try:
        args.func(args)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERIC
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
