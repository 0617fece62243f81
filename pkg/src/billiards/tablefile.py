"""Table definitions on disk.

A table file is the canonical JSON form of ``table.definition``: a dict with
a ``kind`` key naming the constructor plus that constructor's arguments.
Loading rebuilds the table through the ordinary constructors, so every
validation that applies to programmatic construction applies to files too.
Tables whose boundary was produced by a non-reconstructible operation
(curvature perturbation) carry no definition and cannot be saved.
"""

from __future__ import annotations

import json

from ._jsonutil import canonical_dumps
from .errors import DegenerateInput, UnsupportedTable
from .rational import RationalAngleSpec, build_rational_polygon
from .table import Table, build_polygon, build_smooth_curve, smooth_corners


def save_table(table: Table, path) -> None:
    """Write the table's construction record as canonical JSON."""
    if table.definition is None:
        raise UnsupportedTable(
            "table has no serializable definition (perturbed boundary)")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(canonical_dumps(table.definition))


def _require(d: dict, key: str, kind: str):
    if key not in d:
        raise DegenerateInput(f"{kind} table file lacks {key!r}")
    return d[key]


def table_from_definition(d) -> Table:
    """Rebuild a table from a parsed definition dict."""
    if not isinstance(d, dict):
        raise DegenerateInput("table file must hold a JSON object")
    kind = d.get("kind")
    if kind == "polygon":
        return build_polygon(_require(d, "vertices", kind))
    if kind == "spline":
        return build_smooth_curve(_require(d, "points", kind))
    if kind == "smoothed_polygon":
        base = build_polygon(_require(d, "vertices", kind))
        subset = d.get("corner_subset")
        return smooth_corners(base, _require(d, "fillet_radius", kind),
                              corner_subset=subset)
    if kind == "rational_polygon":
        angles = [tuple(a) for a in _require(d, "angles", kind)]
        spec = RationalAngleSpec(
            angles=angles,
            side_lengths=_require(d, "side_lengths", kind),
            origin=tuple(d.get("origin", (0.0, 0.0))),
            heading=float(d.get("heading", 0.0)))
        return build_rational_polygon(spec)
    raise DegenerateInput(f"unknown table kind {kind!r}")


def load_table(path) -> Table:
    """Read a table file.

    Missing/unreadable paths propagate OSError (the CLI maps those to usage
    failures); malformed content — bad JSON, unknown kind, missing keys,
    invalid geometry — raises package errors.
    """
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DegenerateInput(f"table file is not valid JSON: {exc}") \
                from exc
    return table_from_definition(data)
