"""Command-line entry point.

Usage: dsel <experiment> [--config PATH] [--seed N] [--out PATH]
       [--no-figure]

Writes the experiment's CSV to --out (default <experiment>.csv) and a
PNG rendering alongside it. Exit codes: 0 success, 1 configuration
error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .experiments import (
    EXPERIMENTS,
    ConfigError,
    default_config,
    load_config,
    replace,
    run_experiment,
    write_csv,
)

__all__ = ["main", "build_parser"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dsel",
        description="Differential CSI feedback experiments for doubly-selective MIMO links.",
    )
    parser.add_argument("experiment", choices=EXPERIMENTS, help="which experiment to run")
    parser.add_argument("--config", metavar="PATH", help="flat key=value config file")
    parser.add_argument("--seed", type=int, metavar="N", help="override the config seed")
    parser.add_argument("--out", metavar="PATH", help="CSV output path (default <experiment>.csv)")
    parser.add_argument(
        "--no-figure", action="store_true", help="skip the PNG rendering next to the CSV"
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.config is not None:
            cfg = load_config(args.config, experiment=args.experiment)
        else:
            cfg = default_config(args.experiment)
        if args.seed is not None:
            cfg = replace(cfg, seed=args.seed)
        if args.out is not None:
            cfg = replace(cfg, out_path=args.out)
    except ConfigError as exc:
        print(f"dsel: config error: {exc}", file=sys.stderr)
        return 1

    out = Path(cfg.out_path if cfg.out_path else f"{cfg.experiment}.csv")
    try:
        table = run_experiment(cfg)
        write_csv(table, cfg, str(out))
        print(f"wrote {out} ({len(table.rows)} rows)")
        if not args.no_figure:
            # delayed import: matplotlib startup is slow and unneeded otherwise
            from .figures import render_figure

            png = out.with_suffix(".png")
            render_figure(table, cfg, str(png))
            print(f"wrote {png}")
    except ConfigError as exc:
        print(f"dsel: config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - map anything else to exit 2
        print(f"dsel: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
