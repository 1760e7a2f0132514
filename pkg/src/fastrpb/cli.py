"""Command-line entry point: ``fastrpb verify|bench|report``.

Exit codes: 0 success, 1 property or oracle failure, 2 usage error.
"""

import argparse
import sys

from . import bench, verify
from .errors import InsufficientDataError, OracleMismatchError

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def _int_list(text):
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _scopes(text):
    if text == "all":
        return list(verify.SCOPES)
    scopes = [s.strip() for s in text.split(",") if s.strip()]
    bad = [s for s in scopes if s not in verify.SCOPES]
    if bad:
        raise argparse.ArgumentTypeError(
            f"unknown scope(s) {', '.join(bad)}; choose from {', '.join(verify.SCOPES)} or 'all'"
        )
    return scopes


def build_parser():
    p = argparse.ArgumentParser(prog="fastrpb", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run oracle-equivalence and invariant checks")
    v.add_argument("--scope", type=_scopes, default=list(verify.SCOPES),
                   help="comma-separated subset of %s, or 'all'" % ",".join(verify.SCOPES))
    v.add_argument("--seeds", type=int, default=len(verify.DEFAULT_SEEDS),
                   help="number of random seeds per property")
    v.add_argument("--seed", type=int, default=None, help="replay a single seed")

    b = sub.add_parser("bench", help="time an op and write CSV records")
    b.add_argument("--op", required=True, choices=bench.OPS)
    b.add_argument("--sizes", type=_int_list, required=True, help="ascending comma-separated sizes")
    b.add_argument("--dim", type=int, default=64)
    b.add_argument("--kernel", default="-", help="kernel variant or 'softmax' (attention ops)")
    b.add_argument("--repeats", type=int, default=3)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--check", action="store_true", help="assert oracle equivalence before timing")
    b.add_argument("--output", default="-", help="CSV path, '-' for stdout")

    r = sub.add_parser("report", help="fit log-log scaling exponents from a bench CSV")
    r.add_argument("csv_path")
    return p


def _cmd_verify(args, out):
    seeds = [args.seed] if args.seed is not None else list(range(args.seeds))
    results = verify.run_verify(args.scope, seeds=seeds)
    print(verify.format_verify_report(results), file=out)
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAILURE


def _cmd_bench(args, out, err):
    try:
        records = bench.run_bench(
            args.op, args.sizes, args.dim, kernel=args.kernel, repeats=args.repeats,
            seed=args.seed, check=args.check,
        )
    except OracleMismatchError as exc:
        print(f"oracle check failed: {exc}", file=err)
        return EXIT_FAILURE
    except ValueError as exc:
        print(f"usage error: {exc}", file=err)
        return EXIT_USAGE
    if args.output == "-":
        out.write(bench.records_to_csv(records))
    else:
        bench.write_csv(records, args.output)
    return EXIT_OK


def _cmd_report(args, out, err):
    try:
        fits = bench.scaling_report(args.csv_path)
    except InsufficientDataError as exc:
        print(f"insufficient data: {exc}", file=err)
        return EXIT_FAILURE
    except (OSError, ValueError) as exc:
        print(f"usage error: {exc}", file=err)
        return EXIT_USAGE
    print(bench.format_report(fits), file=out)
    return EXIT_OK


def main(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    if args.command == "verify":
        return _cmd_verify(args, out)
    if args.command == "bench":
        return _cmd_bench(args, out, err)
    return _cmd_report(args, out, err)


if __name__ == "__main__":
    sys.exit(main())
