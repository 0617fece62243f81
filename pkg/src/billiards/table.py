"""Closed billiard tables of perimeter one.

A Table is an ordered, contiguous, counterclockwise chain of boundary pieces.
Construction always (1) rescales by a homothety about the origin so the
perimeter is exactly one, (2) rotates the parameter origin to the canonical
start (lowest boundary point, leftmost on ties), (3) detects corners as
one-sided tangent mismatches at piece junctions, and (4) rejects
self-intersecting boundaries.  Arc length (mod 1) is the global parameter.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from shapely.geometry import LinearRing

from .errors import (AtCorner, DegenerateInput, RadiusTooLarge,
                     SelfIntersecting, SupportHitsCorner, UnsupportedTable,
                     NoIntersection)
from .geometry import (CircularArc, OffsetCurve, PieceChain, Segment,
                       TrigCurve, cross2, rot90, unit)

CONTIGUITY_TOL = 1e-12     # junction gap, relative to table size
CORNER_ANGLE_TOL = 1e-7    # rad; one-sided tangent mismatch above this = corner
AT_CORNER_TOL = 1e-12      # evaluate() refuses parameters this close to corners
_TIE_TOL = 1e-9            # canonical-start tie breaking
_MIN_SMOOTH_POINTS = 4


@dataclass(frozen=True, eq=False)
class CornerInfo:
    """One corner: junction parameter, location, one-sided tangents, and the
    signed exterior turn angle (positive = convex on a CCW boundary)."""
    param: float
    point: np.ndarray
    tangent_in: np.ndarray
    tangent_out: np.ndarray
    turn: float
    piece_index: int


@dataclass(frozen=True, eq=False)
class BoundaryPoint:
    param: float
    point: np.ndarray
    tangent: np.ndarray
    outward_normal: np.ndarray
    curvature: float


@dataclass
class CurvatureBump:
    """Compactly supported normal bump: center arc-length parameter, support
    half-width, and signed amplitude (positive pushes outward).  Profile is
    amplitude * (1 - v^2)^3 with v = (s - center)/halfwidth.

    ``homothety_ratio`` is filled in by perturb_curvature: the rescaling the
    perturbed table needed to restore perimeter one."""
    center: float
    halfwidth: float
    amplitude: float
    homothety_ratio: float | None = None


class Table:
    """Perimeter-one closed table; global parameter = arc length mod 1."""

    def __init__(self, pieces, offsets, corners, scale, definition=None,
                 rational_angles=None):
        self.pieces = list(pieces)
        self.offsets = np.asarray(offsets, float)
        self.corners = list(corners)
        self.corner_params = np.array([c.param for c in corners])
        self.scale = float(scale)
        self.perimeter = 1.0
        self.definition = definition
        self.rational_angles = rational_angles

    @property
    def is_rational(self):
        return self.rational_angles is not None

    # -- parameter plumbing --------------------------------------------------
    def wrap(self, s):
        return np.asarray(s, float) % 1.0

    def locate(self, s):
        """Map wrapped parameter(s) to (piece index, local arc length)."""
        s = self.wrap(s)
        ss = np.atleast_1d(s)
        j = np.clip(np.searchsorted(self.offsets, ss, side="right") - 1,
                    0, len(self.pieces) - 1)
        local = ss - self.offsets[j]
        if s.ndim == 0:
            return int(j[0]), float(local[0])
        return j, local

    def _gather(self, s, method):
        s = np.asarray(s, float)
        if s.ndim == 0:
            i, u = self.locate(s)
            return getattr(self.pieces[i], method)(u)
        j, local = self.locate(s)
        out = None
        for idx in np.unique(j):
            mask = j == idx
            vals = np.asarray(getattr(self.pieces[idx], method)(local[mask]),
                              float)
            if out is None:
                out = np.zeros(s.shape + vals.shape[1:])
            out[mask] = vals
        return out

    def point(self, s):
        return self._gather(s, "point")

    def tangent(self, s):
        return self._gather(s, "tangent")

    def curvature(self, s):
        return self._gather(s, "curvature")

    def outward_normal(self, s):
        return -rot90(self.tangent(s))

    def corner_distance(self, s):
        """Wrap-aware distance from s to the nearest corner (inf if none)."""
        if len(self.corner_params) == 0:
            return np.inf if np.asarray(s).ndim == 0 else np.full(
                np.asarray(s).shape, np.inf)
        s = self.wrap(s)
        d = np.abs(np.asarray(s)[..., None] - self.corner_params)
        d = np.minimum(d, 1.0 - d)
        return d.min(axis=-1)

    def evaluate(self, s):
        """Pointwise boundary data at parameter s; AtCorner at corners."""
        s = float(self.wrap(s))
        if self.corner_distance(s) <= AT_CORNER_TOL:
            raise AtCorner(f"parameter {s!r} sits on a corner")
        i, u = self.locate(s)
        piece = self.pieces[i]
        t = piece.tangent(u)
        return BoundaryPoint(param=s, point=piece.point(u), tangent=t,
                             outward_normal=-rot90(t),
                             curvature=float(piece.curvature(u)))

    # -- global geometry -----------------------------------------------------
    def ray_hit(self, origin, direction, t_floor):
        """First boundary intersection of origin + t*direction, t >= t_floor.

        Returns (t, s).  Raises NoIntersection if every piece misses, which
        for a closed boundary means the ray escaped through numerical cracks.
        """
        best = None
        for i, piece in enumerate(self.pieces):
            for t, u in piece.ray_hits(origin, direction, t_floor):
                if best is None or t < best[0]:
                    best = (t, (self.offsets[i] + u) % 1.0)
        if best is None:
            raise NoIntersection("ray met no boundary piece")
        return best

    def boundary_polyline(self, n=4096):
        """Parameter/point arrays tracing the boundary once (corners and
        junctions included exactly)."""
        params = np.union1d(np.linspace(0.0, 1.0, n, endpoint=False),
                            self.offsets[:-1] % 1.0)
        return params, self.point(params)

    def closest_param(self, p):
        """Arc-length parameter of (a) nearest boundary point to p."""
        p = np.asarray(p, float)
        best = (np.inf, 0.0)
        for i, piece in enumerate(self.pieces):
            u_nodes, pts = piece.polyline()
            d2 = np.sum((pts - p) ** 2, axis=1)
            j = int(np.argmin(d2))
            lo = u_nodes[max(j - 1, 0)]
            hi = u_nodes[min(j + 1, len(u_nodes) - 1)]
            u = _refine_closest(piece, p, lo, hi)
            d = float(np.linalg.norm(piece.point(u) - p))
            if d < best[0]:
                best = (d, (self.offsets[i] + u) % 1.0)
        return best[1]


def _refine_closest(piece, p, lo, hi):
    from scipy.optimize import minimize_scalar
    if hi - lo < 1e-15:
        return lo
    res = minimize_scalar(
        lambda u: float(np.sum((piece.point(u) - p) ** 2)),
        bounds=(lo, hi), method="bounded",
        options={"xatol": 1e-13})
    return float(res.x)


def _signed_area(points):
    x, y = points[:, 0], points[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _check_simple(points):
    try:
        ring = LinearRing(points)
    except Exception as exc:  # shapely refuses degenerate coordinate sets
        raise DegenerateInput(f"unusable boundary polyline: {exc}") from exc
    if not ring.is_valid:
        raise SelfIntersecting("boundary crosses itself")


def _canonical_start(pieces):
    """Rotate/split the piece chain so parameter 0 sits at the lowest
    boundary point (leftmost on ties).  Returns the new piece list."""
    cands = []
    for i, piece in enumerate(pieces):
        for u in piece.lowest_point_candidates():
            u = float(np.clip(u, 0.0, piece.length))
            i2, u2 = i, u
            if u2 >= piece.length - 1e-13:       # endpoint: use next piece start
                i2, u2 = (i + 1) % len(pieces), 0.0
            pt = pieces[i2].point(u2)
            cands.append((float(pt[1]), float(pt[0]), i2, u2))
    ymin = min(c[0] for c in cands)
    cands = [c for c in cands if c[0] <= ymin + _TIE_TOL]
    xmin = min(c[1] for c in cands)
    cands = [c for c in cands if c[1] <= xmin + _TIE_TOL]
    _, _, i0, u0 = min(cands, key=lambda c: (c[2], c[3]))
    if u0 <= 1e-13:
        return pieces[i0:] + pieces[:i0]
    if len(pieces) == 1 and isinstance(pieces[0], TrigCurve):
        return [pieces[0].with_start(u0)]
    first, second = pieces[i0].split(u0)
    return [second] + pieces[i0 + 1:] + pieces[:i0] + [first]


def _detect_corners(pieces, offsets):
    corners = []
    n = len(pieces)
    for j in range(n):
        t_in = pieces[j - 1].end_tangent
        t_out = pieces[j].start_tangent
        turn = float(np.arctan2(cross2(t_in, t_out), np.dot(t_in, t_out)))
        if abs(turn) > CORNER_ANGLE_TOL:
            corners.append(CornerInfo(param=float(offsets[j] % 1.0),
                                      point=pieces[j].start_point,
                                      tangent_in=t_in, tangent_out=t_out,
                                      turn=turn, piece_index=j))
    corners.sort(key=lambda c: c.param)
    return corners


def _assemble(pieces, definition=None, rational_by_point=None):
    """Normalize, canonicalize, and validate a contiguous CCW piece chain."""
    size = max(float(np.max(np.abs(p.end_point))) for p in pieces)
    gap_tol = CONTIGUITY_TOL * max(1.0, size)
    for j, piece in enumerate(pieces):
        gap = np.linalg.norm(pieces[j - 1].end_point - piece.start_point)
        if gap > gap_tol:
            raise DegenerateInput(f"pieces {j-1} and {j} do not meet "
                                  f"(gap {gap:.3e})")
    perimeter = sum(p.length for p in pieces)
    if perimeter <= 0.0:
        raise DegenerateInput("empty boundary")
    scale = 1.0 / perimeter
    pieces = [p.scaled(scale) for p in pieces]
    pieces = _canonical_start(pieces)

    lengths = np.array([p.length for p in pieces])
    offsets = np.concatenate([[0.0], np.cumsum(lengths)])
    # absorb rounding so the wrap point is exactly 1
    offsets /= offsets[-1]

    corners = _detect_corners(pieces, offsets)
    table = Table(pieces, offsets, corners, scale, definition=definition)

    _, poly = table.boundary_polyline()
    _check_simple(poly)
    if _signed_area(poly) <= 0.0:
        raise DegenerateInput("boundary must run counterclockwise")

    if rational_by_point is not None:
        frs = []
        for c in corners:
            best = min(rational_by_point,
                       key=lambda pf: np.linalg.norm(
                           np.asarray(pf[0], float) * scale - c.point))
            if np.linalg.norm(np.asarray(best[0], float) * scale
                              - c.point) > 1e-9:
                raise DegenerateInput("corner/vertex mismatch")
            frs.append(best[1])
        table.rational_angles = tuple(frs)
    return table


# -- constructors -------------------------------------------------------------

def build_polygon(vertices):
    """Simple polygon table from a vertex loop (either orientation)."""
    vertices = np.asarray(vertices, float)
    if vertices.ndim != 2 or vertices.shape[1] != 2 or len(vertices) < 3:
        raise DegenerateInput("need at least 3 planar vertices")
    diam = float(np.max(np.abs(vertices - vertices.mean(axis=0)))) or 1.0
    v = vertices.copy()
    if _signed_area(v) < 0.0:
        v = v[::-1]
    if abs(_signed_area(v)) < 1e-14 * diam * diam:
        raise DegenerateInput("polygon has zero area")
    n = len(v)
    for i in range(n):
        e = v[(i + 1) % n] - v[i]
        if np.linalg.norm(e) <= 1e-12 * diam:
            raise DegenerateInput(f"zero-length edge at vertex {i}")
    for i in range(n):
        d1 = unit(v[i] - v[i - 1])
        d2 = unit(v[(i + 1) % n] - v[i])
        turn = np.arctan2(cross2(d1, d2), np.dot(d1, d2))
        if abs(turn) < 1e-9:
            raise DegenerateInput(f"collinear vertex {i}")
        if abs(abs(turn) - np.pi) < 1e-9:
            raise DegenerateInput(f"zero-angle spike at vertex {i}")
    _check_simple(v)
    pieces = [Segment(v[i], v[(i + 1) % n]) for i in range(n)]
    definition = {"kind": "polygon",
                  "vertices": [[float(x), float(y)] for x, y in vertices]}
    return _assemble(pieces, definition=definition)


def build_smooth_curve(points):
    """Closed C^2 table through the given loop of points (trigonometric
    interpolation; exact on circles/ellipses sampled uniformly)."""
    points = np.asarray(points, float)
    if points.ndim != 2 or points.shape[1] != 2 or \
            len(points) < _MIN_SMOOTH_POINTS:
        raise DegenerateInput(
            f"need at least {_MIN_SMOOTH_POINTS} control points")
    if len(np.unique(points, axis=0)) != len(points):
        raise DegenerateInput("repeated control point")
    curve = TrigCurve.from_points(points)
    mean_speed = curve.length / (2.0 * np.pi)
    if curve.min_speed() < 1e-6 * mean_speed:
        raise DegenerateInput("interpolant has a cusp (speed collapses)")
    t = np.linspace(0.0, 2.0 * np.pi, 1024, endpoint=False)
    if _signed_area(curve._raw(t)) < 0.0:
        curve = curve.reversed()
    definition = {"kind": "spline",
                  "points": [[float(x), float(y)] for x, y in points]}
    return _assemble([curve], definition=definition)


def corner_set(table):
    """The table's corners in parameter order."""
    return list(table.corners)


def evaluate(table, s):
    return table.evaluate(s)


def smooth_corners(table, radius, corner_subset=None):
    """Replace corners by tangent circular fillets of the given radius.

    Both pieces flanking every smoothed corner must be straight edges.  The
    result is renormalized to perimeter one (its .scale records the
    homothety).
    """
    if radius <= 0.0:
        raise DegenerateInput("fillet radius must be positive")
    if not table.corners:
        raise UnsupportedTable("table has no corners to smooth")
    n_corner = len(table.corners)
    if corner_subset is None:
        chosen = list(range(n_corner))
    else:
        chosen = sorted(set(int(i) for i in corner_subset))
        if chosen and (chosen[0] < 0 or chosen[-1] >= n_corner):
            raise DegenerateInput("corner index out of range")
    chosen_set = set(chosen)

    n = len(table.pieces)
    corner_at_junction = {c.piece_index: (idx, c)
                          for idx, c in enumerate(table.corners)}
    # tangency offsets claimed at the (start, end) of each piece
    claims = np.zeros((n, 2))
    for idx in chosen:
        c = table.corners[idx]
        j = c.piece_index
        for adj in (table.pieces[j - 1], table.pieces[j]):
            if not isinstance(adj, Segment):
                raise UnsupportedTable(
                    "can only fillet corners between straight edges")
        q = radius * np.tan(0.5 * abs(c.turn))
        claims[j, 0] += q
        claims[(j - 1) % n, 1] += q
    for j in range(n):
        if claims[j].sum() > table.pieces[j].length - 1e-12:
            raise RadiusTooLarge(
                f"fillets overlap on edge starting at parameter "
                f"{table.offsets[j]:.6g}")

    new_pieces = []
    for j in range(n):
        piece = table.pieces[j]
        hit = corner_at_junction.get(j)
        if hit is not None and hit[0] in chosen_set:
            c = hit[1]
            d1, d2 = c.tangent_in, c.tangent_out
            q = radius * np.tan(0.5 * abs(c.turn))
            t1 = c.point - q * d1
            t2 = c.point + q * d2
            center = t1 + radius * np.sign(c.turn) * rot90(d1)
            theta0 = np.arctan2(t1[1] - center[1], t1[0] - center[0])
            arc = CircularArc(center, radius, theta0, c.turn)
            if np.linalg.norm(arc.end_point - t2) > 1e-9:
                raise DegenerateInput("fillet arc failed to meet the far edge")
            new_pieces.append(arc)
        if isinstance(piece, Segment):
            a = piece.a + claims[j, 0] * piece._dir
            b = piece.b - claims[j, 1] * piece._dir
            new_pieces.append(Segment(a, b))
        else:
            new_pieces.append(piece)

    definition = None
    src = table.definition
    if src is not None and src.get("kind") == "polygon":
        definition = {"kind": "smoothed_polygon",
                      "vertices": src["vertices"],
                      "fillet_radius": float(radius)}
        if corner_subset is not None:
            definition["corner_subset"] = [int(i) for i in chosen]
    return _assemble(new_pieces, definition=definition)


def _split_circle(table, cuts):
    """Cut the piece chain at the given wrapped parameters; returns a list of
    (start_param, piece) in boundary order."""
    pieces = list(table.pieces)
    starts = list(table.offsets[:-1] % 1.0)
    for s in sorted(set(float(c) % 1.0 for c in cuts)):
        for k, (s0, piece) in enumerate(zip(starts, pieces)):
            u = s - s0
            if 1e-12 < u < piece.length - 1e-12:
                left, right = piece.split(u)
                pieces[k:k + 1] = [left, right]
                starts[k:k + 1] = [s0, s]
                break
    return list(zip(starts, pieces))


def _in_window(s, lo, hi):
    """Is wrapped parameter s inside [lo, hi) on the circle?"""
    s = (s - lo) % 1.0
    return s < (hi - lo) % 1.0 - 1e-15


def perturb_curvature(table, bump):
    """Graft a compactly supported normal offset onto the table.

    The bump support [center - halfwidth, center + halfwidth] must stay clear
    of corners.  Zero amplitude returns the table itself (ratio exactly 1).
    The rebuilt table is renormalized; the homothety is recorded on the bump.
    """
    if not 0.0 < bump.halfwidth < 0.5:
        raise DegenerateInput("bump halfwidth must lie in (0, 1/2)")
    if bump.amplitude == 0.0:
        bump.homothety_ratio = 1.0
        return table
    center = float(bump.center) % 1.0
    rho = float(bump.halfwidth)
    lo, hi = center - rho, center + rho
    if len(table.corner_params):
        d = np.abs((table.corner_params - center + 0.5) % 1.0 - 0.5)
        if np.min(d) <= rho:
            raise SupportHitsCorner(
                "bump support crosses a corner; shrink halfwidth or move it")

    cut = _split_circle(table, [lo, hi])
    lo_w = lo % 1.0
    window, rest = [], []
    for s0, piece in cut:
        (window if _in_window(s0, lo_w, hi % 1.0) else rest).append((s0, piece))
    # order the window from the support start, the rest from the support end
    window.sort(key=lambda sp: (sp[0] - lo_w) % 1.0)
    rest.sort(key=lambda sp: (sp[0] - hi % 1.0) % 1.0)
    chain = PieceChain([p for _, p in window])

    amp = float(bump.amplitude)

    def _v(s):
        return (np.asarray(s, float) - rho) / rho

    def h(s):
        v = np.clip(_v(s), -1.0, 1.0)
        return amp * (1.0 - v * v) ** 3

    def dh(s):
        v = np.clip(_v(s), -1.0, 1.0)
        return amp * -6.0 * v * (1.0 - v * v) ** 2 / rho

    def d2h(s):
        v = np.clip(_v(s), -1.0, 1.0)
        return amp * -6.0 * (1.0 - v * v) * (1.0 - 5.0 * v * v) / rho ** 2

    offset = OffsetCurve(chain, h, dh, d2h)
    new_pieces = [offset] + [p for _, p in rest]
    result = _assemble(new_pieces, definition=None)
    bump.homothety_ratio = result.scale
    return result


def transfer_params(src, dst, params):
    """Carry arc-length parameters from src to a table rebuilt from src's
    geometry (perturbed or smoothed): closest-point projection of the scaled
    source point.  Exact wherever the boundary was not modified."""
    params = np.atleast_1d(np.asarray(params, float))
    if dst is src:  # unmodified (e.g. a zero-amplitude perturbation)
        return params % 1.0
    pts = src.point(params) * dst.scale
    return np.array([dst.closest_param(p) for p in pts])


def table_fingerprint(table):
    """Deterministic identity string for reports and renders.

    Hashes the construction parameters when the table has them; otherwise
    (curvature-perturbed tables) hashes a dense boundary polyline.
    """
    from ._jsonutil import fingerprint
    if table.definition is not None:
        return fingerprint(table.definition)
    _, poly = table.boundary_polyline()
    return fingerprint({"kind": "opaque-boundary", "polyline": poly})
