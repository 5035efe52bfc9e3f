"""``sifs`` command line interface.

Exit status: 0 on success, 1 when a check fails, 2 on bad input.
"""
from __future__ import annotations

import argparse
import sys

from . import __version__
from . import hyperspace as hs
from .engine import SIFSError, attract
from .fileio import (
    InputError,
    dumps,
    load_config,
    load_map,
    load_space,
    read_json,
    read_set,
    render_pgm,
    trace_csv,
    write_atomic,
)
from .fixtures import FixtureError, selftest, suite_hash
from .metric import CONTINUOUS_KINDS, MetricSpace
from .sampling import parse_sample
from .suzuki import classify

EXIT_OK, EXIT_CHECK, EXIT_INPUT = 0, 1, 2
VERDICTS = ("banach", "suzuki_only", "neither")


def _positive(kind):
    def parse(text):
        value = kind(text)
        if not value > 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return value

    return parse


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sifs",
        description="Suzuki iterated function systems: contraction checks, Hausdorff distances, attractors.",
    )
    parser.add_argument("--version", action="version", version=f"sifs {__version__} (fixtures {suite_hash()})")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="classify a map as banach, suzuki_only or neither")
    p.add_argument("--space", required=True, help="space JSON document")
    p.add_argument("--map", required=True, help="map JSON document")
    p.add_argument(
        "--sample",
        default=None,
        help="sample spec: all | grid:N | random:N | points (default: all for finite spaces, grid:100 otherwise)",
    )
    p.add_argument("--seed", type=int, default=0, help="seed for random:N sampling")
    p.add_argument("--expect", choices=VERDICTS, help="exit 1 unless the verdict matches")
    p.add_argument("--out", help="also write the report JSON here")

    p = sub.add_parser("hausdorff", help="Hausdorff distance between two set CSV files")
    p.add_argument("--a", required=True, help="first set (CSV)")
    p.add_argument("--b", required=True, help="second set (CSV)")
    p.add_argument("--metric", choices=CONTINUOUS_KINDS, default="euclidean")
    p.add_argument("--brute", action="store_true", help="skip the bucket-grid acceleration")

    p = sub.add_parser("attract", help="iterate the Hutchinson operator to the attractor")
    p.add_argument("--config", required=True, help="SIFS config JSON")
    p.add_argument("--out", help="attractor CSV")
    p.add_argument("--trace", help="trace CSV (iter,h_succ,ratio,cardinality)")
    p.add_argument("--cert", help="certificate JSON")
    p.add_argument("--tol", type=_positive(float), help="override the config tolerance")
    p.add_argument("--max-iter", type=_positive(int), help="override the config max_iter")
    p.add_argument("--resolution", type=_positive(float), help="override the config resolution")

    p = sub.add_parser("render", help="rasterize an attractor CSV to binary PGM")
    p.add_argument("--in", dest="src", required=True, help="set CSV")
    p.add_argument("--out", required=True, help="output .pgm")
    p.add_argument("--width", type=_positive(int), default=800)
    p.add_argument("--height", type=_positive(int), default=800)

    p = sub.add_parser("selftest", help="run the bundled reference fixtures")
    p.add_argument("--filter", help="only fixtures whose name contains this text")
    p.add_argument("--out-dir", help="write per-fixture reports, sets, traces and images here")
    p.add_argument("--fixtures-dir", help=argparse.SUPPRESS)
    return parser


def cmd_classify(args):
    space_doc = read_json(args.space)
    space = load_space(space_doc)
    tmap = load_map(read_json(args.map))
    sample, scheme = parse_sample(space, args.sample, seed=args.seed, points=space_doc.get("points"))
    report = classify(space, tmap, sample, sampling=scheme)
    text = dumps(report.to_dict())
    if args.out:
        write_atomic(args.out, text)
    sys.stdout.write(text)
    if args.expect and report.verdict != args.expect:
        return EXIT_CHECK
    return EXIT_OK


def cmd_hausdorff(args):
    A = read_set(args.a)
    B = read_set(args.b)
    if A.dimension != B.dimension:
        raise InputError(f"sets have dimensions {A.dimension} and {B.dimension}")
    space = MetricSpace(args.metric, dimension=A.dimension)
    if args.brute or A.dimension > 3:
        value = hs.hausdorff(space, A, B)
    else:
        value = hs.hausdorff_accelerated(space, A, B)
    print(f"{value:.17g}")
    return EXIT_OK


def cmd_attract(args):
    doc = read_json(args.config)
    sifs, seeds, tol, max_iter = load_config(doc, resolution=args.resolution)
    if args.tol is not None:
        tol = args.tol
    if args.max_iter is not None:
        max_iter = args.max_iter
    run = attract(sifs, seeds, tol, max_iter)
    cert = run.certificate.to_dict()
    if args.out:
        write_atomic(args.out, hs.to_csv(run.attractor))
    if args.trace:
        write_atomic(args.trace, trace_csv(run.trace))
    if args.cert:
        write_atomic(args.cert, dumps(cert))
    sys.stdout.write(dumps({"iterations": run.trace.n_iter, "stop_reason": run.trace.stop_reason,
                            "cardinality": len(run.attractor), "certificate": cert}))
    return EXIT_OK if run.certificate.passed else EXIT_CHECK


def cmd_render(args):
    A = read_set(args.src)
    write_atomic(args.out, render_pgm(A.points, args.width, args.height))
    return EXIT_OK


def cmd_selftest(args):
    results = selftest(args.filter, args.out_dir, args.fixtures_dir)
    if not results:
        print(f"no fixture matches {args.filter!r}", file=sys.stderr)
        return EXIT_INPUT
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_CHECK


COMMANDS = {
    "classify": cmd_classify,
    "hausdorff": cmd_hausdorff,
    "attract": cmd_attract,
    "render": cmd_render,
    "selftest": cmd_selftest,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except FixtureError as exc:
        print(f"sifs: broken fixture {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SIFSError as exc:
        print(f"sifs: {exc}", file=sys.stderr)
        return EXIT_CHECK
    except ValueError as exc:
        print(f"sifs: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
