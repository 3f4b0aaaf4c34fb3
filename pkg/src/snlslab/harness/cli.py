"""Command-line entry point.

Exit codes: 0 when every verdict passes, 2 when a verdict fails, 1 on any
execution error (including a malformed config or unknown subcommand).
"""

from __future__ import annotations

import argparse
import logging
import sys

from ..errors import LabError
from .config import RunConfig, load_config, override
from .experiments import EXPERIMENTS
from .output import write_result

EXIT_PASS, EXIT_ERROR, EXIT_FAIL = 0, 1, 2

log = logging.getLogger("snlslab")


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; this CLI reserves 2 for FAIL."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="snlslab", description="Truncated stochastic NLS experiments.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True
    for name, fn in EXPERIMENTS.items():
        p = sub.add_parser(name, help=(fn.__doc__ or "").strip().splitlines()[0] if fn.__doc__ else None)
        p.add_argument("--config", help="run configuration file")
        p.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
        p.add_argument("--paths", type=int, help="Monte Carlo path count P")
        p.add_argument("--out", help="output directory")
        p.add_argument("--threads", type=int, help="worker threads")
    return parser


def resolve_config(args) -> RunConfig:
    rc = load_config(args.config) if args.config else RunConfig()
    return override(rc, seed=args.seed, paths=args.paths, out_dir=args.out, threads=args.threads)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        rc = resolve_config(args)
        result = EXPERIMENTS[args.command](rc)
        path = write_result(result, rc.manifest(), rc.out_dir)
    except LabError as exc:
        print(f"snlslab {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    print(f"{result.name}: {result.verdict} ({len(result.rows)} rows) -> {path}")
    return EXIT_PASS if result.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
