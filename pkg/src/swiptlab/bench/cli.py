"""Command-line entry point.

One subcommand per experiment kind; all share --config/--seed/--out/
--quick/--workers. Exit codes: 0 success, 1 unexpected failure, 2 bad
configuration or arguments, 3 experiment completed but raised a result
warning (for example an all-infeasible threshold grid).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Callable, Sequence

from ..errors import ConfigError
from .config import ResolvedConfig, load_config, resolve_config
from .experiments import (
    ExperimentOutcome,
    run_ga_design,
    run_mi_snr,
    run_re_region,
    run_rtfv_experiment,
    run_ssr_eh,
)

_RUNNERS: dict[str, Callable[[ResolvedConfig, Path, int], ExperimentOutcome]] = {
    "mi-snr": run_mi_snr,
    "re-region": run_re_region,
    "ssr-eh": run_ssr_eh,
    "rtfv-run": run_rtfv_experiment,
    "ga-design": run_ga_design,
}

# Subcommand spelling -> experiment kind (only rtfv differs).
_SUBCOMMANDS = {
    "mi-snr": "mi-snr",
    "re-region": "re-region",
    "ssr-eh": "ssr-eh",
    "rtfv": "rtfv-run",
    "ga-design": "ga-design",
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swiptlab",
        description="Seeded link-level experiments with reproducible CSV output.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _SUBCOMMANDS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", type=str, default=None, help="TOML config file")
        p.add_argument("--seed", type=int, default=None, help="master seed override")
        p.add_argument("--out", type=str, default=None, help="output directory")
        p.add_argument("--quick", action="store_true", help="CI-scale sample counts")
        p.add_argument("--workers", type=int, default=1, help="sweep worker threads")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    kind = _SUBCOMMANDS[args.command]
    try:
        data = load_config(args.config) if args.config else {}
        rc = resolve_config(kind, data, seed=args.seed, quick=args.quick)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if args.workers < 1:
        print("config error: --workers must be at least 1", file=sys.stderr)
        return 2

    out_dir = Path(args.out if args.out is not None else "results")
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        outcome = _RUNNERS[kind](rc, out_dir, args.workers)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    for path in outcome.csv_paths:
        print(f"wrote {path}")
    print(f"wrote {out_dir / 'metadata.json'}")
    for warning in outcome.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    return 3 if outcome.failed else 0


if __name__ == "__main__":
    sys.exit(main())
