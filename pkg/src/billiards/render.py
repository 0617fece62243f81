"""Deterministic SVG pictures of a table with orbit chords or a trajectory.

The input is a report dict as produced by the command-line front end (or by
``orbit_report``/``trajectory_report`` below).  Reports carry the fingerprint
of the table they were computed on; rendering against any other table raises
MismatchedReport rather than drawing chords on the wrong boundary.
"""

from __future__ import annotations

import numpy as np

from .errors import MismatchedReport
from .table import Table, table_fingerprint

_POLYLINE_N = 1024


def _fmt(x: float) -> str:
    # fixed short form; deterministic across runs and platforms
    return format(float(x), ".9g")


def orbit_report(table: Table, orbits) -> dict:
    """Report dict for a list of PeriodicOrbit results."""
    entries = []
    for o in orbits:
        entries.append({
            "tau": int(o.tau),
            "params": [float(p) for p in o.params],
            "length": float(o.length),
            "residual": float(o.residual),
            "closure": float(o.closure),
            "primitive": bool(o.primitive),
            "nondegenerate": bool(o.report.nondegenerate),
            "balanced_det": float(o.report.balanced_det),
            "index": int(o.report.index),
        })
    return {"report": "orbits", "table_id": table_fingerprint(table),
            "orbits": entries}


def trajectory_report(table: Table, params, points, termination) -> dict:
    """Report dict for an iterated bounce trajectory."""
    return {"report": "trajectory", "table_id": table_fingerprint(table),
            "params": [float(p) for p in params],
            "points": [[float(x), float(y)] for x, y in points],
            "termination": str(termination)}


def _boundary_path(table: Table) -> str:
    _, poly = table.boundary_polyline(_POLYLINE_N)
    cmds = ["M %s %s" % (_fmt(poly[0, 0]), _fmt(-poly[0, 1]))]
    cmds += ["L %s %s" % (_fmt(x), _fmt(-y)) for x, y in poly[1:]]
    cmds.append("Z")
    return " ".join(cmds)


def _chords(table: Table, params) -> list:
    pts = table.point(np.asarray(params, float))
    n = len(pts)
    lines = []
    for i in range(n):
        a, b = pts[i], pts[(i + 1) % n]
        lines.append((a[0], a[1], b[0], b[1]))
    return lines


def render_svg(report: dict, table: Table) -> str:
    """SVG 1.1 document: the boundary as one closed path, plus one line per
    orbit chord (or the open trajectory polyline for map reports)."""
    if not isinstance(report, dict) or "table_id" not in report:
        raise MismatchedReport("report carries no table fingerprint")
    if report["table_id"] != table_fingerprint(table):
        raise MismatchedReport("report was produced from a different table")

    _, poly = table.boundary_polyline(_POLYLINE_N)
    lo = poly.min(axis=0)
    hi = poly.max(axis=0)
    pad = 0.05 * float(max(hi - lo))
    x0, y0 = lo - pad
    w, h = (hi - lo) + 2 * pad
    stroke = 0.004 * float(max(w, h))

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        'width="640" height="640" viewBox="%s %s %s %s">'
        % (_fmt(x0), _fmt(-(y0 + h)), _fmt(w), _fmt(h)),
        '<path class="boundary" fill="none" stroke="black" '
        'stroke-width="%s" d="%s"/>' % (_fmt(stroke), _boundary_path(table)),
    ]
    kind = report.get("report")
    if kind == "orbits":
        for entry in report.get("orbits", []):
            for xa, ya, xb, yb in _chords(table, entry["params"]):
                parts.append(
                    '<line class="chord" stroke="crimson" '
                    'stroke-width="%s" x1="%s" y1="%s" x2="%s" y2="%s"/>'
                    % (_fmt(stroke), _fmt(xa), _fmt(-ya),
                       _fmt(xb), _fmt(-yb)))
    elif kind == "trajectory":
        pts = report.get("points", [])
        if len(pts) >= 2:
            d = "M %s %s " % (_fmt(pts[0][0]), _fmt(-pts[0][1]))
            d += " ".join("L %s %s" % (_fmt(x), _fmt(-y)) for x, y in pts[1:])
            parts.append('<path class="trajectory" fill="none" '
                         'stroke="steelblue" stroke-width="%s" d="%s"/>'
                         % (_fmt(stroke), d))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
