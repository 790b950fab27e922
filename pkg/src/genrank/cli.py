"""Command line entry point.

Exit codes: 0 success, 1 unexpected per-cell error, 2 invalid arguments or
structure, 3 trials disagreed in some cell, 4 saturation failure
(``max_terms`` exceeded).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time

from genrank.cache import ResultCache
from genrank.generic_rank import RankConfig
from genrank.rank_engine import FloatTol, PrimeField
from genrank.report import PRESET_IDS, render, run_preset, single_report
from genrank.structures import (
    CenteredSymmetricSlices,
    Free,
    StructureError,
    Symmetric,
    SymmetricSlices,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DISAGREEMENT = 3
EXIT_SATURATION = 4

log = logging.getLogger("genrank")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _dims(text):
    try:
        dims = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    return dims


def _u64(text):
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _common(parser, suppress):
    default = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    g = parser.add_argument_group("run options")
    g.add_argument("--seed", type=_u64, default=default(1), help="base seed (default 1)")
    g.add_argument("--trials", type=int, default=default(3), help="independent trials per cell (default 3)")
    g.add_argument("--backend", choices=("field", "float"), default=default("field"))
    g.add_argument("--tol", type=float, default=default(1e-8), help="relative rank tolerance, float backend only")
    g.add_argument("--format", choices=("md", "csv", "json"), default=default("md"))
    g.add_argument("--out", default=default(None), help="write the report here instead of stdout")
    g.add_argument("--cache", default=default(None), help="line-delimited json results cache")
    g.add_argument("--jobs", type=int, default=default(1), help="worker processes for sweeps")
    g.add_argument("--max-terms", type=int, default=default(None), help="cap on appended terms per trial")
    g.add_argument("-v", "--verbose", action="store_true", default=default(False))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="genrank", description="Generic rank of structured multi-way arrays.")
    _common(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("free", help="unconstrained array of the given dimensions")
    p.add_argument("--dims", type=_dims, required=True, help="e.g. 4,3,2")
    _common(p, suppress=True)

    p = sub.add_parser("cube", help="unconstrained N x ... x N array of order L")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--order", type=int, required=True)
    _common(p, suppress=True)

    p = sub.add_parser("sym", help="fully symmetric array of dimension N and order L")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--order", type=int, required=True)
    _common(p, suppress=True)

    p = sub.add_parser("indscal", help="I slices of symmetric J x J matrices")
    p.add_argument("--j", type=int, required=True)
    p.add_argument("--i", type=int, required=True)
    p.add_argument("--centered", action="store_true", help="double-centered slices")
    _common(p, suppress=True)

    p = sub.add_parser("sweep", help="reproduce a table preset")
    p.add_argument("--preset", choices=PRESET_IDS, required=True)
    _common(p, suppress=True)
    return parser


def _structure(args):
    if args.command == "free":
        return Free(args.dims)
    if args.command == "cube":
        return Free((args.n,) * args.order)
    if args.command == "sym":
        return Symmetric(args.n, args.order)
    if args.command == "indscal":
        kind = CenteredSymmetricSlices if args.centered else SymmetricSlices
        return kind(args.j, args.i)
    raise ValueError(args.command)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )

    try:
        ring = PrimeField() if args.backend == "field" else FloatTol(args.tol)
        cfg = RankConfig(ring=ring, seed=args.seed, trials=args.trials, max_terms=args.max_terms)
        if args.jobs < 1:
            raise ValueError("--jobs must be >= 1")
        structure = None if args.command == "sweep" else _structure(args)
    except (StructureError, ValueError) as exc:
        print(f"genrank: error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    cache_path = args.cache or os.environ.get("GENRANK_CACHE")
    cache = ResultCache(cache_path) if cache_path else None

    start = time.perf_counter()
    if structure is None:
        report = run_preset(args.preset, cfg, parallelism=args.jobs, cache=cache)
    else:
        report = single_report(structure, cfg, cache)
    log.info("%s finished in %.2f s", report.preset, time.perf_counter() - start)
    for c in report.cells:
        log.info("%s %s: %.3f s", c.row, c.col, c.seconds)

    text = render(report, args.format)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)

    if any(c.saturation_failure for c in report.cells):
        return EXIT_SATURATION
    if any(c.error for c in report.cells):
        return 1
    if any(c.agreement is False for c in report.cells):
        return EXIT_DISAGREEMENT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
