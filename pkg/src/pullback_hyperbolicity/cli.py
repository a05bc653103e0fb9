"""``analyze <config-file> [--out DIR] [--seed N] [--threads N]``."""

from __future__ import annotations

import argparse
import dataclasses
import sys

from .errors import ConfigError
from .report import build_report, exit_code, write_files
from .scenario import U64_MAX, load_scenario

EXIT_CONFIG = 2


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="analyze",
        description="Pointwise characteristic analysis of a sigma-model scenario.",
    )
    p.add_argument("config", help="scenario file (TOML)")
    p.add_argument("--out", metavar="DIR", help="output directory (overrides [output] dir)")
    p.add_argument("--seed", type=int, help="random seed (overrides [analysis] seed)")
    p.add_argument("--threads", type=int, help="worker threads (overrides [analysis] threads)")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        sc = load_scenario(args.config)
        overrides = {}
        if args.seed is not None:
            if not 0 <= args.seed <= U64_MAX:
                raise ConfigError(f"--seed must be in [0, 2^64 - 1], got {args.seed}")
            overrides["seed"] = args.seed
        if args.threads is not None:
            if args.threads < 1:
                raise ConfigError(f"--threads must be >= 1, got {args.threads}")
            overrides["threads"] = args.threads
        if args.out is not None:
            overrides["output_dir"] = args.out
        sc = dataclasses.replace(sc, **overrides)
    except ConfigError as exc:
        print(f"analyze: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    report, files = build_report(sc)
    for path in write_files(files, sc.output_dir):
        print(path)
    verdict = report.get("aggregate", {}).get("verdict")
    if verdict:
        print(f"verdict: {verdict}")
    return exit_code(report)


if __name__ == "__main__":
    sys.exit(main())
