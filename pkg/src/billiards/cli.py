"""Command-line front end.

One subcommand per library operation: bounce-map iteration, periodic-orbit
search, Hessian certificates, phase-space density scans, perturbation
persistence, bundle distance, corner smoothing, rational-polygon
approximation, and SVG rendering.

All output is canonical JSON (sorted keys, floats at 17 significant digits)
except ``render``, which emits SVG 1.1.  Identical invocations produce
byte-identical output.  Exit status: 0 on success, 1 on a domain error
(invalid geometry, no convergence, mismatched report), 2 on a usage error
(bad flags, unreadable files).
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from ._jsonutil import canonical_dumps
from .errors import BilliardsError, DegenerateInput
from .metric import alpha_distance, sample_unit_tangent_bundle
from .phase import PhasePoint, admissible_directions, iterate
from .rational import approximate_by_rational_polygon
from .render import orbit_report, render_svg, trajectory_report
from .search import (density_scan, find_periodic_orbit, multistart_search,
                     persistence_test)
from .table import CurvatureBump, smooth_corners, table_fingerprint
from .tablefile import load_table, save_table
from .variational import assemble_hessian, check_nondegeneracy


def _floats(text: str) -> list:
    try:
        return [float(x) for x in text.split(",") if x != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated float list: "
                                         f"{text!r}")


def _ints(text: str) -> list:
    try:
        return [int(x) for x in text.split(",") if x != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated int list: "
                                         f"{text!r}")


def _grid(text: str):
    parts = text.lower().split("x")
    try:
        a, b = (int(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like 10x10, got "
                                         f"{text!r}")
    return a, b


def _write(text: str, out) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _emit_report(report: dict, out) -> None:
    _write(canonical_dumps(report), out)


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="billiards",
        description="planar billiard tables: orbits, certificates, scans")
    sub = top.add_subparsers(dest="command", required=True)

    def cmd(name, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--table", required=True, help="table JSON file")
        p.add_argument("--out", default=None,
                       help="output file (default: stdout)")
        return p

    p = cmd("map", "iterate the bounce map from one phase point")
    p.add_argument("--start", type=float, required=True,
                   help="arc-length parameter of the starting point")
    p.add_argument("--angle", type=float, required=True,
                   help="direction angle in (0, pi), tangent toward outward "
                        "normal, of the arriving ray")
    p.add_argument("--steps", type=int, required=True)

    p = cmd("orbits", "multistart periodic-orbit search")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--tau", type=int, help="single period to search")
    g.add_argument("--tau-max", type=int, help="search periods 2..tau_max")
    p.add_argument("--seeds", type=int, required=True,
                   help="seeds per period")
    p.add_argument("--rng", type=int, required=True, help="random seed")

    p = cmd("hessian", "second-order certificate at a critical configuration")
    p.add_argument("--params", type=_floats, required=True,
                   help="comma-separated bounce parameters")

    p = cmd("density", "phase-cell coverage by found periodic orbits")
    p.add_argument("--grid", type=_grid, required=True, help="e.g. 10x10")
    p.add_argument("--tau-max", type=int, required=True)
    p.add_argument("--budget", type=int, required=True,
                   help="maximum number of orbit solves")
    p.add_argument("--rng", type=int, required=True, help="random seed")

    p = cmd("persist", "re-solve an orbit on a curvature-perturbed table")
    p.add_argument("--params", type=_floats, required=True,
                   help="seed bounce parameters of the orbit")
    p.add_argument("--center", type=float, required=True,
                   help="bump center (arc-length parameter)")
    p.add_argument("--halfwidth", type=float, required=True)
    p.add_argument("--amplitude", type=float, required=True)

    p = cmd("alpha", "sampled unit-tangent-bundle distance between tables")
    p.add_argument("--other", required=True, help="second table JSON file")
    p.add_argument("--samples", type=int, default=2000,
                   help="boundary samples per table (default 2000)")

    p = cmd("smooth", "replace corners by circular fillets")
    p.add_argument("--radius", type=float, required=True)
    p.add_argument("--corners", type=_ints, default=None,
                   help="comma-separated corner indices (default: all)")

    p = cmd("approx", "rational-angle polygon within a bundle distance")
    p.add_argument("--tol", type=float, required=True)

    p = cmd("render", "draw a report over its table as SVG")
    p.add_argument("--report", required=True, help="report JSON file")

    return top


def _cmd_map(args) -> None:
    table = load_table(args.table)
    half = admissible_directions(table, args.start)
    if not 0.0 < args.angle < np.pi:
        raise DegenerateInput("angle must lie strictly between 0 and pi")
    start = PhasePoint(args.start, half.direction(args.angle))
    traj = iterate(table, start, args.steps)
    params = [st.param for st in traj.states]
    points = table.point(np.array(params))
    report = trajectory_report(table, params, points, traj.termination)
    report.update({"command": "map", "start": float(args.start),
                   "angle": float(args.angle), "steps": int(args.steps)})
    _emit_report(report, args.out)


def _cmd_orbits(args) -> None:
    table = load_table(args.table)
    if args.tau is not None:
        lo = hi = int(args.tau)
    else:
        lo, hi = 2, int(args.tau_max)
    orbits = multistart_search(table, hi, args.seeds, rng_seed=args.rng,
                               tau_min=lo)
    report = orbit_report(table, orbits)
    report.update({"command": "orbits", "tau_min": lo, "tau_max": hi,
                   "n_seeds": int(args.seeds), "rng_seed": int(args.rng)})
    _emit_report(report, args.out)


def _cmd_hessian(args) -> None:
    table = load_table(args.table)
    hess = assemble_hessian(table, np.array(args.params))
    cert = check_nondegeneracy(hess)
    report = {
        "command": "hessian",
        "table_id": table_fingerprint(table),
        "params": [float(p) for p in hess.params],
        "matrix": [[float(x) for x in row] for row in hess.matrix],
        "diag": [float(x) for x in hess.diag],
        "offdiag": [float(x) for x in hess.offdiag],
        "balanced_det": float(cert.balanced_det),
        "raw_det": float(cert.raw_det),
        "index": int(cert.index),
        "nondegenerate": bool(cert.nondegenerate),
    }
    _emit_report(report, args.out)


def _cmd_density(args) -> None:
    table = load_table(args.table)
    scan = density_scan(table, args.grid, args.tau_max, args.budget,
                        rng_seed=args.rng)
    ij = np.argwhere(scan.visited)
    report = {
        "command": "density",
        "table_id": scan.table_id,
        "grid": [int(scan.n_s), int(scan.n_theta)],
        "tau_max": int(scan.tau_max),
        "budget": int(scan.budget),
        "rng_seed": int(args.rng),
        "attempts": int(scan.attempts),
        "coverage": float(scan.coverage),
        "visited_cells": [[int(i), int(j)] for i, j in ij],
        "n_orbits": len(scan.orbits),
    }
    _emit_report(report, args.out)


def _cmd_persist(args) -> None:
    table = load_table(args.table)
    orbit = find_periodic_orbit(table, len(args.params),
                                np.array(args.params))
    bump = CurvatureBump(center=args.center, halfwidth=args.halfwidth,
                         amplitude=args.amplitude)
    res = persistence_test(table, orbit, bump)
    report = {
        "command": "persist",
        "table_id": table_fingerprint(table),
        "bump": {"center": float(args.center),
                 "halfwidth": float(args.halfwidth),
                 "amplitude": float(args.amplitude)},
        "survived": bool(res.survived),
        "displacement": float(res.displacement),
        "obstruction": res.obstruction,
        "length_before": float(res.orbit_before.length),
        "length_after": (float(res.orbit_after.length)
                         if res.orbit_after is not None else None),
    }
    _emit_report(report, args.out)


def _cmd_alpha(args) -> None:
    table = load_table(args.table)
    other = load_table(args.other)
    a = sample_unit_tangent_bundle(table, args.samples)
    b = sample_unit_tangent_bundle(other, args.samples)
    report = {
        "command": "alpha",
        "table_id": a.table_id,
        "other_id": b.table_id,
        "n_samples": [int(len(a)), int(len(b))],
        "alpha": float(alpha_distance(a, b)),
    }
    _emit_report(report, args.out)


def _cmd_smooth(args) -> None:
    table = load_table(args.table)
    out_table = smooth_corners(table, args.radius,
                               corner_subset=args.corners)
    if args.out is None:
        _write(canonical_dumps(out_table.definition), None)
    else:
        save_table(out_table, args.out)


def _cmd_approx(args) -> None:
    table = load_table(args.table)
    out_table = approximate_by_rational_polygon(table, args.tol)
    if args.out is None:
        _write(canonical_dumps(out_table.definition), None)
    else:
        save_table(out_table, args.out)


def _cmd_render(args) -> None:
    table = load_table(args.table)
    with open(args.report, "r", encoding="utf-8") as fh:
        report = json.load(fh)
    _write(render_svg(report, table), args.out)


_DISPATCH = {
    "map": _cmd_map,
    "orbits": _cmd_orbits,
    "hessian": _cmd_hessian,
    "density": _cmd_density,
    "persist": _cmd_persist,
    "alpha": _cmd_alpha,
    "smooth": _cmd_smooth,
    "approx": _cmd_approx,
    "render": _cmd_render,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    try:
        _DISPATCH[args.command](args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(f"error: malformed report file: {exc}", file=sys.stderr)
        return 2
    except BilliardsError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
