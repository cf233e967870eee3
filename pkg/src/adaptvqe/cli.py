"""Command line entry point.

    adaptvqe run CONFIG [-o DIR] [-j N] [-v]
    adaptvqe plot OUTPUT_DIR

Exit codes: 0 ok, 2 configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import ConfigError, load_config

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="adaptvqe", description="ADAPT-VQE / MORE-ADAPT-VQE / q-sc-EOM / FCI scans")
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a scan from a YAML config")
    run.add_argument("config", type=Path)
    run.add_argument("-o", "--output", type=Path, default=None, help="override the output directory")
    run.add_argument("-j", "--jobs", type=int, default=1, help="geometries run in parallel")
    run.add_argument("--no-plots", action="store_true")
    run.add_argument("-v", "--verbose", action="count", default=0)
    plot = sub.add_parser("plot", help="redraw plots from an existing output directory")
    plot.add_argument("output", type=Path)
    plot.add_argument("-v", "--verbose", action="count", default=0)
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")

    if args.command == "plot":
        from .plots import plot_scan

        info = {}
        if (args.output / "run.json").exists():
            info = json.loads((args.output / "run.json").read_text())
        plot_scan(args.output, info.get("coordinate", "coordinate"), info.get("name", ""))
        return EXIT_OK

    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.no_plots:
        from dataclasses import replace

        cfg = replace(cfg, plots=False)
    if args.jobs < 1:
        print("config error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_CONFIG

    from .scan import run_scan

    report = run_scan(cfg, args.output, args.jobs)
    for f in report.failures:
        print(f"error: {f}", file=sys.stderr)
    return EXIT_OK if report.ok else EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
