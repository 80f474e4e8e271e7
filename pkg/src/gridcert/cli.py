"""``gridcert`` command-line front end.

Exit codes: 0 success / certified, 1 not certified / not converged, 2 error.
"""

from __future__ import annotations

import argparse
import sys
from collections import OrderedDict
from pathlib import Path

import numpy as np

from . import __version__
from .boundary import (
    canonical_method,
    lambda_union_samples,
    pv_curve,
    sweep_boundary,
)
from .certificates import certify_base, certify_hull, lambda_grid, rhombus
from .io import fmt, read_loads, read_pattern, read_table, write_csv
from .netmodel import consumption_to_injection, load_network
from .pfsolver import DEFAULT_MAX_ITER, DEFAULT_TOL, solve_fixed_point
from .svg import render_svg

EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _global_flags(parser, suppress):
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--network", metavar="PATH", default=default, help="network JSON document")
    parser.add_argument("--out", metavar="PATH", default=default, help="output CSV (default: stdout)")
    parser.add_argument("--svg", action="store_true", default=argparse.SUPPRESS if suppress else False,
                        help="also write an SVG plot next to --out")


def build_parser():
    parser = _Parser(prog="gridcert", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"gridcert {__version__}")
    _global_flags(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("check", parents=[common], help="certify a load vector")
    p.add_argument("loads", help="CSV with bus_id,P,Q (consumption positive)")
    p.add_argument("--norm", choices=["2", "inf", "hull", "all"], default="all")

    p = sub.add_parser("solve", parents=[common], help="fixed-point power flow")
    p.add_argument("loads")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER)

    sub.add_parser("rhombus", parents=[common], help="per-bus limits and hull vertices")

    p = sub.add_parser("boundary", parents=[common], help="boundary along rays in the (P,Q) plane")
    p.add_argument("pattern", help="CSV with bus_id,weight_p,weight_q")
    p.add_argument("--rays", type=int, default=64)
    p.add_argument("--methods", default="oracle,hull,base2,baseinf")
    span = p.add_mutually_exclusive_group()
    span.add_argument("--quadrant", dest="full", action="store_false", default=False)
    span.add_argument("--full", dest="full", action="store_true")
    p.add_argument("--tol", type=float, default=1e-6, help="oracle bisection tolerance")

    p = sub.add_parser("sweep", parents=[common], help="rescaled boundaries over a lambda grid")
    p.add_argument("pattern")
    p.add_argument("--lambda-lo", type=float, default=0.5)
    p.add_argument("--lambda-hi", type=float, default=25.0)
    p.add_argument("--lambda-points", type=int, default=8)
    p.add_argument("--norm", choices=["2", "inf"], default="2")
    p.add_argument("--rays", type=int, default=64)
    p.add_argument("--full", action="store_true")

    p = sub.add_parser("pvcurve", parents=[common], help="PV curve at fixed Q")
    p.add_argument("pattern")
    p.add_argument("--q", type=float, action="append", help="fixed Q (repeatable)")
    p.add_argument("--bus", type=int, help="watched load bus id (default: last)")
    p.add_argument("--points", type=int, default=201)
    p.add_argument("--p-max", type=float, help="continuation end (default: 4x the hull limit at Q=0)")

    p = sub.add_parser("render", parents=[common], help="render a CSV written by another command")
    p.add_argument("csv")
    p.add_argument("--kind", choices=["boundary", "sweep", "pv"], required=True)
    p.add_argument("--title", help="plot title")
    return parser


# ------------------------------------------------------------------- helpers


def _read_text(path):
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror or exc}") from None


def _network(args):
    if not args.network:
        raise CliError("--network PATH is required")
    try:
        return load_network(args.network)
    except OSError as exc:
        raise CliError(f"cannot read {args.network}: {exc.strerror or exc}") from None


def _emit(args, text, series=None, kind=None, title=None):
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if args.svg:
        if not args.out:
            raise CliError("--svg needs --out to know where to write the plot")
        if series is None:
            raise CliError(f"{args.command} has no plot")
        Path(args.out).with_suffix(".svg").write_text(render_svg(series, kind, title), encoding="utf-8")


def boundary_series(rows):
    groups = OrderedDict()
    for row in rows:
        t, a = float(row["t_star"]), float(row["angle_rad"])
        groups.setdefault(row["method"], []).append((t * np.cos(a), t * np.sin(a)))
    return [(m, [p[0] for p in pts], [p[1] for p in pts]) for m, pts in groups.items()]


def sweep_series(rows):
    groups = OrderedDict()
    for row in rows:
        groups.setdefault(int(row["lambda_index"]), []).append((float(row["angle_rad"]), float(row["t_star"])))
    series = []
    envelope = {}
    for idx, pts in groups.items():
        series.append((f"lambda {idx}", [t * np.cos(a) for a, t in pts], [t * np.sin(a) for a, t in pts]))
        for a, t in pts:
            envelope[a] = max(envelope.get(a, -np.inf), t)
    angles = sorted(envelope)
    series.append(("envelope", [envelope[a] * np.cos(a) for a in angles],
                   [envelope[a] * np.sin(a) for a in angles]))
    return series


def pv_series(rows):
    groups = OrderedDict()
    for row in rows:
        groups.setdefault(row.get("Q", ""), []).append((float(row["P"]), float(row["v_mag"])))
    return [(f"Q={q}" if q else "PV", [p for p, _ in pts], [v for _, v in pts]) for q, pts in groups.items()]


SERIES = {"boundary": boundary_series, "sweep": sweep_series, "pv": pv_series}


# ------------------------------------------------------------------ commands


def cmd_check(args):
    net = _network(args)
    Z = net.impedance()
    s = consumption_to_injection(read_loads(_read_text(args.loads), net))
    verdicts = []
    if args.norm in ("2", "all"):
        verdicts.append(certify_base(Z, s, net.v0, 2))
    if args.norm in ("inf", "all"):
        verdicts.append(certify_base(Z, s, net.v0, "inf"))
    if args.norm in ("hull", "all"):
        verdicts.append(certify_hull(rhombus(Z, net.v0), s))
    text = write_csv(["criterion", "certified", "margin"],
                     [[v.criterion, str(v.certified).lower(), v.margin] for v in verdicts])
    _emit(args, text)
    return EXIT_OK if any(v.certified for v in verdicts) else EXIT_FAIL


def cmd_solve(args):
    net = _network(args)
    Z = net.impedance()
    s = consumption_to_injection(read_loads(_read_text(args.loads), net))
    sol = solve_fixed_point(Z, s, net.v0, tol=args.tol, max_iter=args.max_iter)
    # report the current drawn by each load so that v * conj(i) = P + jQ
    i_load = -sol.i
    rows = [[bus, float(v.real), float(v.imag), float(abs(v)), float(i.real), float(i.imag)]
            for bus, v, i in zip(Z.bus_order, sol.v, i_load)]
    _emit(args, write_csv(["bus_id", "v_re", "v_im", "v_mag", "i_re", "i_im"], rows))
    print(f"status={sol.status} iterations={sol.iterations} residual={sol.residual:.3e}", file=sys.stderr)
    return EXIT_OK if sol.converged else EXIT_FAIL


def cmd_rhombus(args):
    net = _network(args)
    Z = net.impedance()
    rh = rhombus(Z, net.v0)
    text = write_csv(["bus_id", "s_max"], [[bus, float(lim)] for bus, lim in zip(Z.bus_order, rh.s_max)])
    vertex_rows = []
    for k, vertex in enumerate(rh.vertices()):
        sign = "+" if k % 2 == 0 else "-"
        vertex_rows.append([f"{sign}{Z.bus_order[k // 2]}"] + [float(x) for x in vertex])
    text += "\n" + write_csv(["vertex"] + [f"s_{b}" for b in Z.bus_order], vertex_rows)
    _emit(args, text)
    return EXIT_OK


def cmd_boundary(args):
    net = _network(args)
    Z = net.impedance()
    pattern = read_pattern(_read_text(args.pattern), net)
    methods = [canonical_method(m) for m in args.methods.split(",") if m.strip()]
    if not methods or "rescaled" in methods:
        raise CliError("--methods takes a subset of oracle,hull,base2,baseinf")
    if args.rays < 2:
        raise CliError("--rays must be >= 2")
    rows = []
    for method in methods:
        kwargs = {"tol": args.tol} if method == "oracle" else {}
        for sample in sweep_boundary(Z, net.v0, pattern, args.rays, method, full=args.full, **kwargs):
            angle = float(np.arctan2(sample.direction[1], sample.direction[0]))
            if args.full and angle < 0:
                angle += 2 * np.pi
            rows.append([angle, sample.t_star, method])
    text = write_csv(["angle_rad", "t_star", "method"], rows)
    _emit(args, text, boundary_series(read_table(text)[1]), "boundary", "Solvability boundaries")
    return EXIT_OK


def cmd_sweep(args):
    net = _network(args)
    Z = net.impedance()
    pattern = read_pattern(_read_text(args.pattern), net)
    if args.rays < 2:
        raise CliError("--rays must be >= 2")
    grid = lambda_grid(args.lambda_lo, args.lambda_hi, args.lambda_points, Z.n)
    union = lambda_union_samples(Z, net.v0, pattern, grid, args.norm, args.rays, full=args.full)
    rows = [[idx, float(a), float(t)]
            for idx in range(len(grid))
            for a, t in zip(union.angles, union.t_star[idx])]
    text = write_csv(["lambda_index", "angle_rad", "t_star"], rows)
    _emit(args, text, sweep_series(read_table(text)[1]), "sweep",
          f"Rescaled certificates ({len(grid)} matrices, norm {union.norm})")
    return EXIT_OK


def cmd_pvcurve(args):
    net = _network(args)
    Z = net.impedance()
    pattern = read_pattern(_read_text(args.pattern), net)
    qs = args.q or [0.0]
    bus = Z.bus_order[-1] if args.bus is None else args.bus
    if bus not in Z.bus_order:
        raise CliError(f"--bus {bus} is not a load bus")
    watch = Z.bus_order.index(bus)
    p_max = args.p_max
    if p_max is None:
        from .boundary import hull_p_limit

        p_max = 4.0 * hull_p_limit(Z, net.v0, pattern, 0.0)
        if not np.isfinite(p_max):
            raise CliError("pattern has no active-power weights; pass --p-max")
    rows = []
    for q in qs:
        curve = pv_curve(Z, net.v0, pattern, q, p_max, args.points, watch)
        for P, v in curve.points:
            rows.append(([float(q)] if len(qs) > 1 else []) + [float(P), float(v)])
        print(f"Q={fmt(q)} P_A={fmt(curve.p_nose)} P_E={fmt(curve.p_estimate)}", file=sys.stderr)
    header = (["Q"] if len(qs) > 1 else []) + ["P", "v_mag"]
    text = write_csv(header, rows)
    _emit(args, text, pv_series(read_table(text)[1]), "pv", f"PV curves at bus {bus}")
    return EXIT_OK


def cmd_render(args):
    header, rows = read_table(_read_text(args.csv))
    if not rows:
        raise CliError(f"{args.csv} has no data rows")
    svg = render_svg(SERIES[args.kind](rows), args.kind, args.title)
    if args.out:
        Path(args.out).write_text(svg, encoding="utf-8")
    else:
        sys.stdout.write(svg)
    return EXIT_OK


COMMANDS = {
    "check": cmd_check,
    "solve": cmd_solve,
    "rhombus": cmd_rhombus,
    "boundary": cmd_boundary,
    "sweep": cmd_sweep,
    "pvcurve": cmd_pvcurve,
    "render": cmd_render,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for name in ("network", "out"):
        if not hasattr(args, name):
            setattr(args, name, None)
    if not hasattr(args, "svg"):
        args.svg = False
    try:
        return COMMANDS[args.command](args)
    except Exception as exc:  # every failure maps to the documented error code
        print(f"gridcert: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
