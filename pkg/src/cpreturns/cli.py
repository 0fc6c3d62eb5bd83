"""Command-line entry point: ``cpreturns <subcommand> --config FILE [--out STEM]``.

Exit codes: 0 success, 2 configuration error, 3 computation over budget.
"""

from __future__ import annotations

import argparse
import json
import sys

from .counting import BudgetError
from .dist import DistParams, DomainError, limit_distribution
from .experiments import (ConfigError, ExperimentResult, PartialResultError, load_config, run,
                          validate_config)

EXIT_OK, EXIT_CONFIG, EXIT_BUDGET = 0, 2, 3

SUBCOMMANDS = {
    "entry-sweep": "entry_sweep",
    "return-sweep": "return_sweep",
    "oscillate": "oscillation",
    "check-conditions": "condition_check",
    "bound-profile": "bound_profile",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cpreturns",
                                     description="Hit-count statistics at periodic points of mixing shifts.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, kind in SUBCOMMANDS.items():
        p = sub.add_parser(name, help=f"run a {kind} experiment from a config file")
        p.add_argument("--config", required=True, help="YAML or JSON experiment config")
        p.add_argument("--out", help="output stem; writes STEM.csv and/or STEM.json (default: stdout)")
        p.add_argument("--seed", type=int, help="override mc.seed")
        p.add_argument("--threads", type=int, help="grid cells evaluated concurrently")
    p = sub.add_parser("dist", help="Polya-Aeppli entry or return probabilities")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--kind", choices=("entry", "return"), default="entry")
    p.add_argument("--r-max", type=int, default=10)
    p.add_argument("--out", help="write the distribution JSON here instead of stdout")
    return parser


def _emit(result: ExperimentResult, out: str | None) -> None:
    if out:
        for path in result.write(out):
            print(path, file=sys.stderr)
        return
    if result.columns:
        sys.stdout.write(result.csv_text())
    else:
        sys.stdout.write(result.json_text())


def _run_experiment(args) -> int:
    raw = load_config(args.config)
    kind = SUBCOMMANDS[args.command]
    raw.setdefault("experiment", kind)
    if raw["experiment"] != kind:
        raise ConfigError(f"config describes a {raw['experiment']!r} experiment, not {kind!r}")
    cfg = validate_config(raw, seed=args.seed, threads=args.threads)
    try:
        result = run(cfg)
    except PartialResultError as exc:
        _emit(exc.partial, args.out)
        raise
    _emit(result, args.out)
    if kind == "oscillation" and args.out:
        print(f"verdict: {result.summary['verdict']} ({result.summary['alternations']} alternations)",
              file=sys.stderr)
    return EXIT_OK


def _run_dist(args) -> int:
    try:
        d = limit_distribution(DistParams(args.t, args.p), args.r_max, args.kind)
    except (DomainError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    text = json.dumps(d.to_dict(), indent=2, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "dist":
            return _run_dist(args)
        return _run_experiment(args)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BudgetError as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())
