"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 bad arguments,
3 resource limit exceeded.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import math
import sys
from fractions import Fraction
from typing import Sequence, TextIO

from . import bounds, checks, ppt_lp
from .errors import ResourceLimitError

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2, 3


def _encode(obj) -> str:
    """JSON with every float at 17 significant digits."""
    if obj is None or isinstance(obj, (bool, str)):
        return json.dumps(obj)
    if isinstance(obj, Fraction):
        return json.dumps(f"{obj.numerator}/{obj.denominator}")
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return json.dumps(str(obj))
        return format(obj, ".17g")
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    if hasattr(obj, "item"):  # numpy scalar
        return _encode(obj.item())
    raise TypeError(f"cannot encode {type(obj).__name__}")


def _scalar(v):
    if v is None or isinstance(v, Fraction):
        return v
    return float(v)


@contextlib.contextmanager
def _output(path: str | None):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="\n", encoding="utf-8") as fh:
            yield fh


def _emit(obj, out: TextIO) -> None:
    out.write(_encode(obj) + "\n")


# -- commands ------------------------------------------------------------------


def cmd_mu_table(args) -> int:
    table = bounds.fig1_data(args.d_min, args.d_max)
    if table.violations:
        print(f"warning: mu_d not strictly decreasing at d={table.violations}", file=sys.stderr)
    with _output(args.out) as out:
        if args.format == "json":
            _emit([{"d": d, "mu": m} for d, m in table.rows], out)
        else:
            table.write_csv(out)
    return EXIT_OK


def cmd_ppt_norm(args) -> int:
    exact = args.mode == "rational"
    res = ppt_lp.ppt_norm(args.d, args.k, exact=exact)
    report = {
        "d": args.d,
        "k": args.k,
        "ppt_value": _scalar(res.value),
        "upper_bound": bounds.parity_upper_bound(args.d, args.k),
        "duality_gap": _scalar(res.duality_gap),
        "status": res.status,
    }
    with _output(args.out) as out:
        _emit(report, out)
    return EXIT_OK if res.status == "optimal" else EXIT_FAIL


def cmd_verify(args) -> int:
    names = list(checks.SUITES) if args.suite == "all" else [args.suite]
    results = checks.run_suites(names, args.d)
    ok = all(c.passed for cs in results.values() for c in cs)
    report = {
        "passed": ok,
        "suites": {
            name: [{"name": c.name, "passed": c.passed, "worst": c.worst, "detail": c.detail}
                   for c in cs]
            for name, cs in results.items()
        },
    }
    with _output(args.out) as out:
        _emit(report, out)
    if not ok:
        failed = [c.name for cs in results.values() for c in cs if not c.passed]
        print("verification failed: " + "; ".join(failed), file=sys.stderr)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_dimension(args) -> int:
    r = bounds.dim_for_eps(args.eps, args.d_max)
    report = {
        "eps": r.eps,
        "d_star": r.d_star,
        "k_star": r.k_star,
        "D": r.D,
        "closed_bound": r.closed_bound,
        "converse": r.converse,
        "d_exponent": r.d_exponent,
        "exponent": r.exponent,
        "checks": r.checks,
    }
    with _output(args.out) as out:
        _emit(report, out)
    return EXIT_OK if all(r.checks.values()) else EXIT_FAIL


def cmd_export_lp(args) -> int:
    exact = args.mode == "rational"
    build = ppt_lp.build_primal if args.which == "primal" else ppt_lp.build_dual_l1
    lp = build(args.d, args.k, exact=exact)
    with _output(args.out) as out:
        ppt_lp.write_lp(lp, out)
    return EXIT_OK


# -- parsing -------------------------------------------------------------------


def _eps(text: str) -> float:
    v = float(text)
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError(f"eps must lie in (0, 1), got {text}")
    return v


def _dim(text: str) -> int:
    v = int(text)
    if v < 2:
        raise argparse.ArgumentTypeError(f"d must be an integer >= 2, got {text}")
    return v


def _pos(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="orthohide", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    m = sub.add_parser("mu-table", help="table of mu_d as CSV (or JSON)")
    m.add_argument("--d-min", type=_dim, default=2)
    m.add_argument("--d-max", type=_dim, default=1000)
    m.add_argument("--format", choices=("csv", "json"), default="csv")
    m.set_defaults(func=cmd_mu_table)

    n = sub.add_parser("ppt-norm", help="PPT norm between the parity states")
    n.add_argument("--d", type=_dim, required=True)
    n.add_argument("--k", type=_pos, required=True)
    n.add_argument("--mode", choices=("float", "rational"), default="float")
    n.set_defaults(func=cmd_ppt_norm)

    v = sub.add_parser("verify", help="run invariant suites")
    v.add_argument("--suite", choices=(*checks.SUITES, "all"), default="all")
    v.add_argument("--d", type=_dim, default=None, help="restrict to one dimension")
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("dimension", help="smallest local dimension for a target eps")
    e.add_argument("--eps", type=_eps, required=True)
    e.add_argument("--d-max", type=int, default=bounds.D_MAX_DEFAULT)
    e.set_defaults(func=cmd_dimension)

    x = sub.add_parser("export-lp", help="write an LP instance in plain text")
    x.add_argument("--d", type=_dim, required=True)
    x.add_argument("--k", type=_pos, required=True)
    x.add_argument("--which", choices=("primal", "dual"), required=True)
    x.add_argument("--mode", choices=("float", "rational"), default="float")
    x.set_defaults(func=cmd_export_lp)

    for sp in (m, n, v, e, x):
        sp.add_argument("--out", default=None, help="output path (default: stdout)")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ResourceLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
