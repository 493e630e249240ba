"""``ids-lab`` command line entry point.

Exit codes: 0 success, 2 invalid configuration, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import config as config_mod
from .errors import ConfigError
from .parallel import resolve_workers
from .runner import ExperimentFailed, run_experiments

SINGLE = ("oracle", "ids", "bracket", "wegner", "selfavg")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ids-lab", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse and validate a configuration")
    p.add_argument("config")

    for name in ("run",) + SINGLE:
        helptext = "run every experiment" if name == "run" else f"run only the {name} estimator"
        p = sub.add_parser(name, help=helptext)
        p.add_argument("config")
        p.add_argument("--seed", type=int, default=None, help="override the master seed")
        p.add_argument("--workers", type=int, default=None, help="worker processes (env IDS_LAB_WORKERS)")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--no-plots", action="store_true", help="skip SVG plots")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_mod.load(args.config)
    except ConfigError as exc:
        print(f"{args.config}: invalid configuration: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"{args.config}: {exc}", file=sys.stderr)
        return 2

    if args.command == "validate":
        print(f"{args.config}: ok ({len(cfg.experiments)} experiments, sha256 {cfg.digest()[:12]})")
        return 0

    only = None if args.command == "run" else args.command
    workers = resolve_workers(args.workers, cfg.run.workers)
    try:
        manifest = run_experiments(cfg, only=only, workers=workers, out=args.out,
                                   plots=not args.no_plots, seed=args.seed)
    except ExperimentFailed as exc:
        print(f"ids-lab: {exc}", file=sys.stderr)
        return 3
    for exp in manifest["experiments"]:
        print(f"{exp['name']}: {', '.join(exp['outputs'])}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
