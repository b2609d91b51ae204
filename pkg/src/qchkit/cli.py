"""Command-line front end.

Exit codes: 0 success, 1 verdict mismatch, 2 input error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__, catalog, checks, geometry, qch, report
from .chart import load_chart
from .errors import QCHError

QUANTITIES = ("gamma", "riemann", "ricci", "tau", "kappa", "coeffs")


def _key_value(text: str) -> tuple[str, float]:
    key, sep, value = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE, got {text!r}")
    try:
        return key.strip(), float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{key}: {value!r} is not a number") from None


def _point(text: str) -> tuple[float, ...]:
    try:
        p = tuple(float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"point must be four comma-separated numbers, got {text!r}") from None
    if len(p) != 4:
        raise argparse.ArgumentTypeError(f"point must have four coordinates, got {len(p)}")
    return p


def _box(text: str) -> tuple[tuple[float, float], ...]:
    try:
        pairs = tuple(tuple(float(v) for v in part.split(":")) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"box must look like lo:hi,lo:hi,lo:hi,lo:hi, got {text!r}") from None
    if len(pairs) != 4 or any(len(p) != 2 for p in pairs):
        raise argparse.ArgumentTypeError("box needs four lo:hi ranges")
    return pairs


def _suites(text: str) -> tuple[str, ...]:
    if text == "all":
        return checks.SUITES
    names = tuple(s.strip() for s in text.split(",") if s.strip())
    unknown = [s for s in names if s not in checks.SUITES]
    if unknown:
        raise argparse.ArgumentTypeError(f"unknown suite(s) {unknown}; choose from {', '.join(checks.SUITES)} or 'all'")
    return names


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qchkit", description="Verify curvature identities of Kähler surface charts.")
    parser.add_argument("--version", action="version", version=f"qchkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("fixtures", help="list built-in fixtures as JSON")

    src = argparse.ArgumentParser(add_help=False)
    group = src.add_mutually_exclusive_group(required=True)
    group.add_argument("--fixture", metavar="NAME", help="built-in fixture (see 'qchkit fixtures')")
    group.add_argument("--chart", metavar="PATH", help="JSON chart file")
    src.add_argument("--param", metavar="K=V", type=_key_value, action="append", default=[], help="parameter override")

    chk = sub.add_parser("check", parents=[src], help="run check suites over sampled points")
    chk.add_argument("--suite", type=_suites, default=checks.SUITES, help="comma-separated suites or 'all' (default)")
    chk.add_argument("--points", type=int, default=10, help="number of sample points (default 10)")
    chk.add_argument("--seed", type=int, default=0, help="sampling seed (default 0)")
    chk.add_argument("--box", type=_box, help="sample box lo:hi,lo:hi,lo:hi,lo:hi (default: the chart's box)")
    chk.add_argument("--point", type=_point, action="append", default=[], help="evaluate this point instead of sampling")
    chk.add_argument("--tol", metavar="NAME=V", type=_key_value, action="append", default=[], help="tolerance override")
    chk.add_argument("--order", type=int, choices=(2, 3), default=2, help="jet order (raised to 3 when needed)")
    chk.add_argument("--workers", type=int, default=os.cpu_count() or 1, help="worker threads")
    chk.add_argument("--out", metavar="PATH", help="report file (default stdout)")

    ev = sub.add_parser("eval", parents=[src], help="print one pointwise quantity as JSON")
    ev.add_argument("--point", type=_point, required=True, help="x1,x2,x3,x4")
    ev.add_argument("quantity", choices=QUANTITIES)
    return parser


def cmd_fixtures(out=None) -> int:
    out = out or sys.stdout
    out.write(json.dumps(catalog.list(), indent=2, sort_keys=True) + "\n")
    return 0


def cmd_check(args, out=None) -> int:
    out = out or sys.stdout
    cfg = report.RunConfig(
        fixture=args.fixture,
        params=dict(args.param),
        chart=args.chart,
        suites=tuple(args.suite),
        points=args.points,
        seed=args.seed,
        box=args.box,
        explicit_points=tuple(args.point),
        tol=dict(args.tol),
        order=args.order,
        workers=args.workers,
    )
    rep, code = report.run(cfg)
    text = report.dumps(rep)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        out.write(text)
    for name, s in rep["summary"].items():
        if s["match"] is False:
            print(f"mismatch: {name} expected {s['expected']}, observed {s['observed']} (worst {s['worst_residual']})",
                  file=sys.stderr)
    return code


def _tolist(x):
    return np.asarray(x).tolist()


def cmd_eval(args, out=None) -> int:
    out = out or sys.stdout
    if args.fixture:
        spec = catalog.get(args.fixture, dict(args.param)).spec
    else:
        spec = load_chart(args.chart, dict(args.param))
    geo = geometry.riemann_at(spec, args.point)
    q = args.quantity
    if q == "gamma":
        value = {"gamma": _tolist(geo.gamma)}  # gamma[k][i][j] = Γ^k_ij
    elif q == "riemann":
        value = {"riemann": _tolist(geo.riemann)}
    elif q == "ricci":
        value = {"ricci": _tolist(geo.ricci)}
    elif q == "tau":
        value = {"tau": geo.tau}
    elif q == "kappa":
        value = {"kappa": geometry.weyl_at(geo, "Jbar").kappa, "kappa_J": geometry.weyl_at(geo, "J").kappa}
    else:
        coeffs, residual = geometry.frame_qch(geo)
        s = qch.ricci_scalars(coeffs)
        value = {"a": coeffs.a, "b": coeffs.b, "c": coeffs.c, "lambda": s.lam, "mu": s.mu, "fit_residual": residual}
    value["point"] = list(args.point)
    out.write(json.dumps(value, sort_keys=True) + "\n")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "fixtures":
            return cmd_fixtures()
        if args.command == "check":
            return cmd_check(args)
        return cmd_eval(args)
    except (QCHError, OSError) as exc:
        print(f"qchkit: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
