"""Command line entry point: ``chanaccess <suite> [--config PATH] [--seed-offset N] [--out DIR]``.

On a configuration error a single JSON line is written to stderr and the
exit code is 2.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import ConfigError, ExperimentConfig, load, validate
from .experiments import SUITES, write_result
from .mwis import OracleSizeError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chanaccess", description="Run a seeded experiment suite.")
    parser.add_argument("suite", choices=sorted(SUITES))
    parser.add_argument("--config", type=Path, help="JSON configuration file (defaults otherwise)")
    parser.add_argument("--seed-offset", type=int, default=0, help="added to every configured seed")
    parser.add_argument("--out", type=Path, help="output directory (overrides config and environment)")
    return parser


def _error(kind: str, path: str, message: str) -> int:
    print(json.dumps({"error": kind, "field": path, "message": message}), file=sys.stderr)
    return 2


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load(args.config) if args.config else validate(ExperimentConfig())
    except ConfigError as exc:
        return _error("config", exc.path, exc.message)
    except OSError as exc:
        return _error("config", "<file>", str(exc))
    if args.seed_offset < 0:
        return _error("argument", "--seed-offset", "must be non-negative")
    out = args.out or cfg.out_dir()
    try:
        result = SUITES[args.suite](cfg, args.seed_offset)
    except OracleSizeError as exc:
        return _error("oracle", "network", str(exc))
    for path in write_result(result, cfg, out):
        print(path)
    if result.violations:
        return _error("safety", "<run>", f"{result.violations} independence violations")
    return 0


if __name__ == "__main__":
    sys.exit(main())
