"""Polygons whose interior angles are rational multiples of pi.

Angles are carried as exact ``Fraction`` multiples of pi so the defining
property (all angles rational, sum exactly ``n - 2``) survives construction
and serialization.  Side lengths are ordinary floats; the closure defect a
float walk would accumulate is removed by a least-squares correction of the
side lengths against the exact headings.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import DegenerateInput, NonClosing, TolTooSmall
from .geometry import Segment
from .metric import alpha_distance, sample_unit_tangent_bundle
from .table import Table, _assemble

_ALPHA_CHECK_N = 2000
_ALPHA_FINAL_N = 4000
_MAX_VERTICES = 65_536
_MAX_DENOMINATOR_CAP = 10_000_000


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (tuple, list)) and len(value) == 2:
        return Fraction(int(value[0]), int(value[1]))
    if isinstance(value, int):
        return Fraction(value)
    raise DegenerateInput(f"angle {value!r} is not an exact rational")


@dataclass(frozen=True)
class RationalAngleSpec:
    """Construction data for a rational-angle polygon.

    angles : interior angles as exact multiples of pi, each in (0, 2) and
        never exactly 1.  A closed polygon needs them to sum to exactly
        ``len(angles) - 2``; that is checked at build time, not here, so a
        non-closing spec can still be constructed and reported on.
    side_lengths : positive side lengths (overall scale is irrelevant;
        the table is normalized to perimeter one)
    origin, heading : placement of the first vertex and first side, so an
        approximant can be anchored on top of the table it approximates
    """

    angles: tuple
    side_lengths: tuple
    origin: tuple = (0.0, 0.0)
    heading: float = 0.0

    def __post_init__(self):
        angles = tuple(_as_fraction(a) for a in self.angles)
        sides = tuple(float(s) for s in self.side_lengths)
        object.__setattr__(self, "angles", angles)
        object.__setattr__(self, "side_lengths", sides)
        object.__setattr__(self, "origin",
                           (float(self.origin[0]), float(self.origin[1])))
        object.__setattr__(self, "heading", float(self.heading))
        n = len(angles)
        if n < 3:
            raise DegenerateInput("need at least 3 angles")
        if len(sides) != n:
            raise DegenerateInput("side count must match angle count")
        for a in angles:
            if not (0 < a < 2) or a == 1:
                raise DegenerateInput(f"interior angle {a} (in units of pi) "
                                      "must lie in (0,2) and not be 1")
        if any(s <= 0.0 for s in sides):
            raise DegenerateInput("side lengths must be positive")


def build_rational_polygon(spec: RationalAngleSpec) -> Table:
    """Walk the spec into a closed polygon table.

    The heading entering vertex ``i`` is accumulated in exact fraction
    arithmetic, so angle sums never drift.  Raises NonClosing if the float
    walk misses its start by more than 1e-10 of the perimeter.
    """
    n = len(spec.angles)
    angle_sum = sum(spec.angles, Fraction(0))
    if angle_sum != n - 2:
        # the exact walk cannot return to its starting heading, let alone
        # its starting point
        raise NonClosing(f"interior angles sum to {angle_sum} (units of pi), "
                         f"a closed {n}-gon needs exactly {n - 2}")
    # exterior turn at vertex i (units of pi), applied after side i-1
    exterior = [1 - a for a in spec.angles]
    partial = Fraction(0)
    headings = np.empty(n)
    for i in range(n):
        headings[i] = spec.heading + np.pi * float(partial)
        partial += exterior[(i + 1) % n]
    dirs = np.stack([np.cos(headings), np.sin(headings)], axis=1)
    sides = np.asarray(spec.side_lengths)
    verts = np.concatenate([[np.asarray(spec.origin, float)],
                            np.cumsum(dirs * sides[:, None], axis=0)
                            + np.asarray(spec.origin, float)])
    gap = float(np.linalg.norm(verts[-1] - verts[0]))
    perimeter = float(sides.sum())
    if gap > 1e-10 * perimeter:
        raise NonClosing(f"polygon walk misses its start by {gap:.3e} "
                         f"(perimeter {perimeter:.3e})")
    v = verts[:-1]
    pieces = [Segment(v[i], v[(i + 1) % n]) for i in range(n)]
    definition = {
        "kind": "rational_polygon",
        "angles": [[a.numerator, a.denominator] for a in spec.angles],
        "side_lengths": [float(s) for s in spec.side_lengths],
        "origin": [spec.origin[0], spec.origin[1]],
        "heading": spec.heading,
    }
    by_point = [(v[(i + 1) % n], spec.angles[(i + 1) % n])
                for i in range(n)]
    tbl = _assemble(pieces, definition=definition, rational_by_point=by_point)
    for corner, frac in zip(tbl.corners, tbl.rational_angles):
        want = np.pi * float(1 - frac)
        if abs(corner.turn - want) > 1e-8:
            raise DegenerateInput("vertex turn deviates from its rational "
                                  f"label by {abs(corner.turn - want):.3e}")
    return tbl


def _inscribed_vertices(table: Table, m: int) -> np.ndarray:
    """Vertex loop for an inscribed polygon.

    Straight pieces contribute only their endpoints (interior points would
    be collinear vertices); curved pieces contribute ~length*m interior
    samples.  A junction param becomes a vertex only when it is a corner or
    borders a straight piece, so a smooth closed loop yields a uniform grid
    with no artifact at the parametrization start.
    """
    offs = table.offsets
    pieces = table.pieces
    straight = [isinstance(p, Segment) for p in pieces]
    corner_set = {round(float(c.param), 15) for c in table.corners}

    def anchored(j):  # piece start param offs[j] should itself be a vertex
        return (straight[j] or straight[j - 1]
                or round(float(offs[j] % 1.0), 15) in corner_set)

    params = []
    for j, piece in enumerate(pieces):
        a, b = float(offs[j]), float(offs[j + 1])
        start_anchored = anchored(j)
        end_anchored = anchored((j + 1) % len(pieces))
        if start_anchored:
            params.append(a)
        if straight[j]:
            continue
        k = max(1, int(np.ceil((b - a) * m)))
        if start_anchored and end_anchored:
            params.extend(a + (np.arange(1, k + 1) / (k + 1)) * (b - a))
        else:
            # unanchored ends: offset grid keeps chords uniform across the
            # smooth junction (and across the wrap of a closed loop)
            params.extend(a + ((np.arange(k) + 0.5) / k) * (b - a))
    params = np.unique(np.asarray(params) % 1.0)
    return table.point(params)


def _snap_polygon(verts: np.ndarray, q_max: int):
    """Snap the vertex loop's turning angles to exact fractions of pi and
    repair side lengths so the walk closes exactly.

    Returns a RationalAngleSpec, or None if the snapped polygon is invalid
    at this resolution (collinear vertex, non-positive side, bad angle).
    """
    n = len(verts)
    edges = np.roll(verts, -1, axis=0) - verts
    lengths = np.linalg.norm(edges, axis=1)
    if np.any(lengths <= 0.0):
        return None
    dirs = edges / lengths[:, None]
    headings = np.arctan2(dirs[:, 1], dirs[:, 0])
    turns = (headings - np.roll(headings, 1) + np.pi) % (2 * np.pi) - np.pi

    # snap every turn onto the common grid (1/q_max) pi: mixed denominators
    # would force the closure repair below onto their lcm, whose integers
    # grow without bound at tight tolerances
    scaled = turns * (q_max / np.pi)
    units = np.rint(scaled).astype(np.int64)
    if np.any(units == 0):
        return None
    deficit = 2 * int(q_max) - int(units.sum())  # in grid units
    base, extra = divmod(deficit, n)
    units += base
    if extra:
        # hand the leftover units to the vertices rounded down the hardest
        order = np.argsort(units - scaled)
        units[order[:extra]] += 1
    exterior = [Fraction(int(u), int(q_max)) for u in units]
    interior = [1 - e for e in exterior]
    if any(not (0 < a < 2) or a == 1 for a in interior):
        return None

    # exact headings from the snapped turns, then the minimum-norm length
    # correction that closes the walk: sum_i L_i u(theta_i) = 0
    heading0 = float(headings[0])
    partial = Fraction(0)
    theta = np.empty(n)
    for i in range(n):
        theta[i] = heading0 + np.pi * float(partial)
        partial += exterior[(i + 1) % n]
    u = np.stack([np.cos(theta), np.sin(theta)], axis=0)  # (2, n)
    correction, *_ = np.linalg.lstsq(u, u @ lengths, rcond=None)
    repaired = lengths - correction
    if np.any(repaired <= 0.0):
        return None
    # interior angle list is indexed so angles[i] sits at vertex i, i.e.
    # between sides i-1 and i; exterior[i] was the turn onto side i
    return RationalAngleSpec(angles=tuple(interior),
                             side_lengths=tuple(repaired),
                             origin=(float(verts[0, 0]), float(verts[0, 1])),
                             heading=heading0)


def _polygon_bound(src: Table, cand: Table) -> float:
    """Upper bound on the continuum bundle distance between two polygons
    whose corners correspond one to one.

    Along matched sides points move at most as much as the worse endpoint
    and the tangent turns by the heading difference; inside a matched corner
    wedge the direction sets are within the larger adjacent heading
    difference.  So max over vertices/sides of (displacement, heading gap)
    dominates the true Hausdorff distance, with none of the fan-phase noise
    a sampled estimate carries.
    """
    a = np.stack([c.point for c in src.corners])
    b = np.stack([c.point for c in cand.corners])
    if len(a) != len(b):
        return np.inf
    shift = int(np.argmin(np.linalg.norm(b - a[0], axis=1)))
    b = np.roll(b, -shift, axis=0)
    disp = float(np.max(np.linalg.norm(a - b, axis=1)))
    ea = np.roll(a, -1, axis=0) - a
    eb = np.roll(b, -1, axis=0) - b
    ha = np.arctan2(ea[:, 1], ea[:, 0])
    hb = np.arctan2(eb[:, 1], eb[:, 0])
    dh = np.abs((ha - hb + np.pi) % (2 * np.pi) - np.pi)
    return max(disp, float(np.max(dh)))


def approximate_by_rational_polygon(table: Table, tol: float,
                                    max_denominator: int = 360) -> Table:
    """Rational-angle polygon within metric distance ``tol`` of ``table``.

    A table that is already a rational polygon is returned unchanged.  For a
    polygon the corner turns are snapped to fractions and the result is
    accepted on an exact displacement/heading bound; for a curved table an
    inscribed polygon is refined until the sampled-bundle distance drops
    below ``tol``.  Raises TolTooSmall when the refinement budget runs out.
    """
    if tol <= 0.0:
        raise DegenerateInput("tolerance must be positive")
    if table.rational_angles is not None:
        return table
    if tol < 1e-12:
        # sampled-bundle verification cannot certify below roundoff scale,
        # so don't burn the whole refinement ladder finding that out
        raise TolTooSmall(f"tolerance {tol} is below the verification "
                          "resolution (1e-12)")

    q = max(int(max_denominator), int(np.ceil(5.0 / tol)))
    curved = any(not isinstance(p, Segment) for p in table.pieces)
    m = 16

    ref = None
    while True:
        if curved:
            verts = _inscribed_vertices(table, m)
        else:
            verts = np.stack([c.point for c in table.corners])
        spec = _snap_polygon(verts, q)
        candidate = None
        if spec is not None:
            try:
                candidate = build_rational_polygon(spec)
            except (DegenerateInput, NonClosing):
                candidate = None
        if candidate is not None:
            if not curved:
                if _polygon_bound(table, candidate) <= tol:
                    return candidate
            else:
                if ref is None:
                    ref = sample_unit_tangent_bundle(table, _ALPHA_CHECK_N)
                alpha = alpha_distance(
                    ref,
                    sample_unit_tangent_bundle(candidate, _ALPHA_CHECK_N))
                if alpha <= 0.9 * tol:
                    final = alpha_distance(
                        sample_unit_tangent_bundle(table, _ALPHA_FINAL_N),
                        sample_unit_tangent_bundle(candidate, _ALPHA_FINAL_N))
                    if final <= tol:
                        return candidate
        # refine: more vertices resolves curvature, a larger denominator
        # resolves angle snapping (the only knob a polygon has)
        if curved and m < _MAX_VERTICES:
            m *= 2
        elif q < _MAX_DENOMINATOR_CAP:
            q *= 2
        else:
            raise TolTooSmall(f"no rational-angle polygon within {tol} of "
                              "this table at the refinement cap")
