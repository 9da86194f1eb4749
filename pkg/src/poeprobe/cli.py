"""Command-line entry point: ``poeprobe run|analyze|spectrum|sweep``."""
from __future__ import annotations

import argparse
import logging
import sys

from . import pipeline


def _window(text: str) -> tuple[int, int]:
    lo, sep, hi = text.partition(":")
    if not sep:
        raise argparse.ArgumentTypeError("use the form a:b")
    try:
        a, b = int(lo), int(hi)
    except ValueError as exc:
        raise argparse.ArgumentTypeError("window bounds must be integers") from exc
    if a < 1 or b < a:
        raise argparse.ArgumentTypeError("need 1 <= a <= b")
    return a, b


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="poeprobe", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="simulate and diagnose one experiment config")
    p.add_argument("config")

    p = sub.add_parser("analyze", help="diagnose a measurement-record file")
    p.add_argument("record")
    p.add_argument("--fit-window", type=_window, default=None, metavar="A:B")
    p.add_argument("--alpha", type=float, default=0.01)
    p.add_argument("--residual-units", choices=("absolute", "relative"), default="absolute")
    p.add_argument("--out-dir", default=None, help="write CSV/JSON/SVG here instead of printing JSON")

    p = sub.add_parser("spectrum", help="print the spectral report for a config")
    p.add_argument("config")

    p = sub.add_parser("sweep", help="run every *.json config in a directory")
    p.add_argument("config_dir")
    p.add_argument("--out-dir", default=None)
    p.add_argument("--jobs", type=int, default=1)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "run":
        return pipeline.run_config(args.config)
    if args.command == "analyze":
        return pipeline.analyze_file(args.record, args.fit_window, args.alpha, args.residual_units,
                                     args.out_dir, stdout=sys.stdout)
    if args.command == "spectrum":
        return pipeline.spectrum(args.config, sys.stdout)
    return pipeline.sweep(args.config_dir, args.out_dir, args.jobs)


if __name__ == "__main__":
    sys.exit(main())
