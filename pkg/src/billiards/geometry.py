"""Boundary pieces with unit-speed parametrization.

Every piece exposes the same small surface: ``length``, ``point(u)``,
``tangent(u)``, ``curvature(u)``, ``ray_hits(...)``, ``split(u)``,
``scaled(f)`` for a parameter u in [0, length] measured in arc length.
``point``/``tangent``/``curvature`` accept scalars or 1-d arrays.

Curved pieces are built on a shared arc-length table: composite 8-point
Gauss-Legendre cumulative lengths over panels of the raw parameter, a linear
inverse guess, and two Newton corrections (final parameter error well below
1e-12 for the panel counts used here).
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import brentq

from .errors import DegenerateInput, SelfIntersecting, UnsupportedTable

_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)

# Polyline density for ray bracketing / extremum seeding, nodes per unit arc.
_POLYLINE_DENSITY = 4096
_PARALLEL_EPS = 1e-14
_ROOT_XTOL = 1e-14


def rot90(v):
    """Counterclockwise quarter turn (works on (..., 2) arrays)."""
    v = np.asarray(v, float)
    out = np.empty_like(v)
    out[..., 0] = -v[..., 1]
    out[..., 1] = v[..., 0]
    return out


def unit(v):
    v = np.asarray(v, float)
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    return v / n


def cross2(a, b):
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def _as_param_array(u):
    u = np.asarray(u, float)
    return u, u.ndim == 0


class _PieceBase:
    """Shared endpoint accessors and polyline-based fallbacks."""

    __slots__ = ("_poly_cache",)

    # -- endpoints ---------------------------------------------------------
    @property
    def start_point(self):
        return self.point(0.0)

    @property
    def end_point(self):
        return self.point(self.length)

    @property
    def start_tangent(self):
        return self.tangent(0.0)

    @property
    def end_tangent(self):
        return self.tangent(self.length)

    def curvature_derivative(self, u):
        raise UnsupportedTable(
            f"{type(self).__name__} does not expose d(curvature)/ds")

    # -- polyline cache ----------------------------------------------------
    def polyline(self):
        cache = getattr(self, "_poly_cache", None)
        if cache is None:
            n = max(33, int(self.length * _POLYLINE_DENSITY) + 1)
            u = np.linspace(0.0, self.length, n)
            cache = (u, self.point(u))
            self._poly_cache = cache
        return cache

    def ray_hits(self, origin, direction, t_floor):
        """All transversal intersections with the ray origin + t*direction.

        Returns a list of (t_along_ray, u_on_piece) with t >= t_floor.
        Brackets sign changes of the ray-line side function on the cached
        polyline and refines each with brentq on the exact curve.
        """
        origin = np.asarray(origin, float)
        direction = np.asarray(direction, float)
        u_nodes, pts = self.polyline()
        g = cross2(direction, pts - origin)
        hits = []

        def record(u_root):
            p = self.point(u_root)
            t = float(np.dot(direction, p - origin))
            if t >= t_floor:
                hits.append((t, float(u_root)))

        exact = np.nonzero(g == 0.0)[0]
        for j in exact:
            record(u_nodes[j])
        flips = np.nonzero(g[:-1] * g[1:] < 0.0)[0]
        if flips.size:
            def f(u):
                return float(cross2(direction, self.point(u) - origin))
            for j in flips:
                root = brentq(f, u_nodes[j], u_nodes[j + 1], xtol=_ROOT_XTOL)
                record(root)
        # closed piece: the panel pairs never straddle the seam, so a ray
        # through the join point can leave g[0] and g[-1] with opposite
        # roundoff signs and no bracket anywhere; the root is the seam itself
        if (g[0] * g[-1] < 0.0
                and float(np.linalg.norm(pts[0] - pts[-1])) < 1e-9 * self.length):
            record(u_nodes[0])
        # collapse duplicates from an exact node doubling as a bracket end
        hits.sort()
        out = []
        for t, u in hits:
            if out and abs(t - out[-1][0]) < 1e-12 and abs(u - out[-1][1]) < 1e-12:
                continue
            out.append((t, u))
        return out

    def lowest_point_candidates(self):
        """Arc-length parameters that may realize the minimum-y point."""
        u_nodes, pts = self.polyline()
        j = int(np.argmin(pts[:, 1]))
        cands = [0.0, float(self.length)]
        if 0 < j < len(u_nodes) - 1:
            # refine: root of tangent_y inside the bracketing panel pair
            lo, hi = u_nodes[j - 1], u_nodes[j + 1]
            ty_lo = float(self.tangent(lo)[1])
            ty_hi = float(self.tangent(hi)[1])
            if ty_lo < 0.0 < ty_hi:
                cands.append(brentq(lambda u: float(self.tangent(u)[1]),
                                    lo, hi, xtol=_ROOT_XTOL))
            else:
                cands.append(float(u_nodes[j]))
        return cands

    def split(self, u):
        u = float(u)
        if not 0.0 < u < self.length:
            raise DegenerateInput("split parameter must be interior")
        return Subcurve(self, 0.0, u), Subcurve(self, u, self.length)


class Segment(_PieceBase):
    """Straight edge from a to b."""

    __slots__ = ("a", "b", "length", "_dir")

    def __init__(self, a, b):
        self.a = np.asarray(a, float).copy()
        self.b = np.asarray(b, float).copy()
        d = self.b - self.a
        self.length = float(np.linalg.norm(d))
        if self.length <= 0.0:
            raise DegenerateInput("zero-length edge")
        self._dir = d / self.length

    def point(self, u):
        u, scalar = _as_param_array(u)
        return self.a + u[..., None] * self._dir

    def tangent(self, u):
        u, scalar = _as_param_array(u)
        if scalar:
            return self._dir.copy()
        return np.broadcast_to(self._dir, u.shape + (2,)).copy()

    def curvature(self, u):
        u, scalar = _as_param_array(u)
        return 0.0 if scalar else np.zeros(u.shape)

    def curvature_derivative(self, u):
        return self.curvature(u)

    def ray_hits(self, origin, direction, t_floor):
        origin = np.asarray(origin, float)
        direction = np.asarray(direction, float)
        denom = cross2(direction, self._dir)
        if abs(denom) < _PARALLEL_EPS:
            return []
        rel = self.a - origin
        t = cross2(rel, self._dir) / denom
        u = cross2(rel, direction) / denom
        # tiny end slack; the table-level corner guard owns anything larger
        if t >= t_floor and -1e-12 <= u <= self.length + 1e-12:
            return [(float(t), float(np.clip(u, 0.0, self.length)))]
        return []

    def split(self, u):
        u = float(u)
        if not 0.0 < u < self.length:
            raise DegenerateInput("split parameter must be interior")
        mid = self.point(u)
        return Segment(self.a, mid), Segment(mid, self.b)

    def scaled(self, f):
        return Segment(self.a * f, self.b * f)

    def lowest_point_candidates(self):
        return [0.0, self.length]


class CircularArc(_PieceBase):
    """Arc of a circle; positive sweep runs counterclockwise."""

    __slots__ = ("center", "radius", "theta0", "sweep", "length", "_sign")

    def __init__(self, center, radius, theta0, sweep):
        if radius <= 0.0 or sweep == 0.0 or abs(sweep) > 2.0 * np.pi + 1e-12:
            raise DegenerateInput("bad arc radius/sweep")
        self.center = np.asarray(center, float).copy()
        self.radius = float(radius)
        self.theta0 = float(theta0)
        self.sweep = float(sweep)
        self._sign = 1.0 if sweep > 0 else -1.0
        self.length = self.radius * abs(self.sweep)

    def _angle(self, u):
        return self.theta0 + self._sign * u / self.radius

    def point(self, u):
        u, scalar = _as_param_array(u)
        th = self._angle(u)
        p = self.center + self.radius * np.stack(
            [np.cos(th), np.sin(th)], axis=-1)
        return p

    def tangent(self, u):
        u, scalar = _as_param_array(u)
        th = self._angle(u)
        return self._sign * np.stack([-np.sin(th), np.cos(th)], axis=-1)

    def curvature(self, u):
        u, scalar = _as_param_array(u)
        k = self._sign / self.radius
        return k if scalar else np.full(u.shape, k)

    def curvature_derivative(self, u):
        u, scalar = _as_param_array(u)
        return 0.0 if scalar else np.zeros(u.shape)

    def _param_of_angle(self, theta):
        delta = (self._sign * (theta - self.theta0)) % (2.0 * np.pi)
        slack = 1e-9
        if delta > abs(self.sweep) + slack:
            return None
        return float(np.clip(delta * self.radius, 0.0, self.length))

    def ray_hits(self, origin, direction, t_floor):
        origin = np.asarray(origin, float)
        direction = np.asarray(direction, float)
        rel = origin - self.center
        b = float(np.dot(direction, rel))
        c = float(np.dot(rel, rel)) - self.radius * self.radius
        disc = b * b - c
        if disc <= 0.0:
            return []
        sq = np.sqrt(disc)
        hits = []
        for t in (-b - sq, -b + sq):
            if t < t_floor:
                continue
            p = origin + t * direction
            u = self._param_of_angle(np.arctan2(p[1] - self.center[1],
                                                p[0] - self.center[0]))
            if u is not None:
                hits.append((float(t), u))
        return hits

    def split(self, u):
        u = float(u)
        if not 0.0 < u < self.length:
            raise DegenerateInput("split parameter must be interior")
        mid_sweep = self._sign * u / self.radius
        return (CircularArc(self.center, self.radius, self.theta0, mid_sweep),
                CircularArc(self.center, self.radius, self.theta0 + mid_sweep,
                            self.sweep - mid_sweep))

    def scaled(self, f):
        return CircularArc(self.center * f, self.radius * f,
                           self.theta0, self.sweep)

    def lowest_point_candidates(self):
        cands = [0.0, self.length]
        u = self._param_of_angle(-0.5 * np.pi)
        if u is not None:
            cands.append(u)
        return cands


class _ArcLengthCurve(_PieceBase):
    """Curved piece defined by raw-parameter derivatives, reparametrized by
    arc length via a cumulative Gauss-Legendre table."""

    __slots__ = ("_t_nodes", "_cum", "length")

    # subclasses implement _raw, _raw_d1, _raw_d2 (and optionally _raw_d3)
    # over [t_lo, t_hi], plus _panel_count()

    def _build_tables(self, t_lo, t_hi):
        n = self._panel_count()
        self._t_nodes = np.linspace(t_lo, t_hi, n + 1)
        ta = self._t_nodes[:-1]
        half = 0.5 * (self._t_nodes[1:] - ta)
        pts = ta[:, None] + half[:, None] * (_GL_X[None, :] + 1.0)
        sp = self._speed(pts.ravel()).reshape(pts.shape)
        seg = half * (sp @ _GL_W)
        self._cum = np.concatenate([[0.0], np.cumsum(seg)])
        self.length = float(self._cum[-1])

    def _speed(self, t):
        return np.linalg.norm(self._raw_d1(t), axis=-1)

    def _u_from_t(self, t):
        t, scalar = _as_param_array(t)
        tt = np.atleast_1d(t)
        j = np.clip(np.searchsorted(self._t_nodes, tt, side="right") - 1,
                    0, len(self._t_nodes) - 2)
        ta = self._t_nodes[j]
        half = 0.5 * (tt - ta)
        pts = ta[:, None] + half[:, None] * (_GL_X[None, :] + 1.0)
        sp = self._speed(pts.ravel()).reshape(pts.shape)
        out = self._cum[j] + half * (sp @ _GL_W)
        return float(out[0]) if scalar else out

    def _t_from_u(self, u):
        u, scalar = _as_param_array(u)
        uu = np.clip(np.atleast_1d(u), 0.0, self.length)
        t = np.interp(uu, self._cum, self._t_nodes)
        lo, hi = self._t_nodes[0], self._t_nodes[-1]
        for _ in range(2):
            t = t - (self._u_from_t(t) - uu) / self._speed(t)
            t = np.clip(t, lo, hi)
        return float(t[0]) if scalar else t

    def point(self, u):
        u, scalar = _as_param_array(u)
        return self._raw(self._t_from_u(u))

    def tangent(self, u):
        return unit(self._raw_d1(self._t_from_u(u)))

    def curvature(self, u):
        t = self._t_from_u(u)
        d1 = self._raw_d1(t)
        d2 = self._raw_d2(t)
        sp = np.linalg.norm(d1, axis=-1)
        return cross2(d1, d2) / sp ** 3

    def curvature_derivative(self, u):
        # d(kappa)/ds = cross(d1,d3)/|d1|^4 - 3 cross(d1,d2)(d1.d2)/|d1|^6
        t = self._t_from_u(u)
        d1 = self._raw_d1(t)
        d2 = self._raw_d2(t)
        d3 = self._raw_d3(t)
        sp = np.linalg.norm(d1, axis=-1)
        dot12 = np.sum(np.asarray(d1) * np.asarray(d2), axis=-1)
        return (cross2(d1, d3) / sp ** 4
                - 3.0 * cross2(d1, d2) * dot12 / sp ** 6)


class TrigCurve(_ArcLengthCurve):
    """Closed curve z(t) = sum_k c_k e^{ikt}, t in [0, 2pi].

    Built by FFT interpolation through uniformly-indexed points; reproduces
    any curve whose coordinates are trigonometric polynomials up to the
    sample Nyquist frequency exactly (circles and ellipses in particular).
    """

    __slots__ = ("coeffs", "freqs")

    def __init__(self, coeffs, freqs):
        self.coeffs = np.asarray(coeffs, complex)
        self.freqs = np.asarray(freqs, float)
        self._build_tables(0.0, 2.0 * np.pi)

    @classmethod
    def from_points(cls, points):
        points = np.asarray(points, float)
        n = len(points)
        z = points[:, 0] + 1j * points[:, 1]
        coeffs = np.fft.fft(z) / n
        freqs = np.fft.fftfreq(n, d=1.0 / n)
        return cls(coeffs, freqs)

    def _panel_count(self):
        return max(256, 16 * len(self.coeffs))

    def _eval_series(self, t, power):
        t = np.atleast_1d(np.asarray(t, float))
        phase = np.exp(1j * np.outer(t, self.freqs))
        z = phase @ (self.coeffs * (1j * self.freqs) ** power)
        out = np.stack([z.real, z.imag], axis=-1)
        return out

    def _shape(self, t, out):
        return out[0] if np.asarray(t).ndim == 0 else out

    def _raw(self, t):
        return self._shape(t, self._eval_series(t, 0))

    def _raw_d1(self, t):
        return self._shape(t, self._eval_series(t, 1))

    def _raw_d2(self, t):
        return self._shape(t, self._eval_series(t, 2))

    def _raw_d3(self, t):
        return self._shape(t, self._eval_series(t, 3))

    def min_speed(self):
        t = np.linspace(0.0, 2.0 * np.pi, 4096, endpoint=False)
        return float(np.min(self._speed(t)))

    def with_start(self, u0):
        """Same curve re-phased so the new raw origin sits at arc length u0."""
        t0 = self._t_from_u(float(u0))
        return TrigCurve(self.coeffs * np.exp(1j * self.freqs * t0),
                         self.freqs)

    def reversed(self):
        n = len(self.coeffs)
        t = 2.0 * np.pi * np.arange(n) / n
        pts = self._eval_series(t, 0)
        return TrigCurve.from_points(pts[::-1])

    def scaled(self, f):
        return TrigCurve(self.coeffs * f, self.freqs)


class Subcurve(_PieceBase):
    """Arc-length window [u0, u1] of a unit-speed base piece."""

    __slots__ = ("base", "u0", "u1", "length")

    def __init__(self, base, u0, u1):
        if not 0.0 <= u0 < u1 <= base.length + 1e-12:
            raise DegenerateInput("bad subcurve window")
        self.base = base
        self.u0 = float(u0)
        self.u1 = float(min(u1, base.length))
        self.length = self.u1 - self.u0

    def point(self, u):
        u, _ = _as_param_array(u)
        return self.base.point(self.u0 + u)

    def tangent(self, u):
        u, _ = _as_param_array(u)
        return self.base.tangent(self.u0 + u)

    def curvature(self, u):
        u, _ = _as_param_array(u)
        return self.base.curvature(self.u0 + u)

    def curvature_derivative(self, u):
        u, _ = _as_param_array(u)
        return self.base.curvature_derivative(self.u0 + u)

    def split(self, u):
        u = float(u)
        if not 0.0 < u < self.length:
            raise DegenerateInput("split parameter must be interior")
        return (Subcurve(self.base, self.u0, self.u0 + u),
                Subcurve(self.base, self.u0 + u, self.u1))

    def scaled(self, f):
        return Subcurve(self.base.scaled(f), self.u0 * f, self.u1 * f)


class PieceChain(_PieceBase):
    """Contiguous run of pieces presented as one unit-speed curve.

    Used as the substrate for normal-offset windows; junctions must be C^1
    (the caller guarantees no corners inside the window).
    """

    __slots__ = ("pieces", "offsets", "length")

    def __init__(self, pieces):
        self.pieces = list(pieces)
        lengths = np.array([p.length for p in self.pieces])
        self.offsets = np.concatenate([[0.0], np.cumsum(lengths)])
        self.length = float(self.offsets[-1])

    def _locate(self, u):
        uu = np.atleast_1d(np.clip(u, 0.0, self.length))
        j = np.clip(np.searchsorted(self.offsets, uu, side="right") - 1,
                    0, len(self.pieces) - 1)
        return j, uu - self.offsets[j]

    def _gather(self, u, method):
        u, scalar = _as_param_array(u)
        j, local = self._locate(u)
        if scalar:
            return getattr(self.pieces[int(j[0])], method)(float(local[0]))
        out = None
        for idx in np.unique(j):
            mask = j == idx
            vals = getattr(self.pieces[idx], method)(local[mask])
            vals = np.asarray(vals, float)
            if out is None:
                out = np.zeros(u.shape + vals.shape[1:])
            out[mask] = vals
        return out

    def point(self, u):
        return self._gather(u, "point")

    def tangent(self, u):
        return self._gather(u, "tangent")

    def curvature(self, u):
        return self._gather(u, "curvature")

    def curvature_derivative(self, u):
        return self._gather(u, "curvature_derivative")

    def scaled(self, f):
        return PieceChain([p.scaled(f) for p in self.pieces])


class OffsetCurve(_ArcLengthCurve):
    """Base curve displaced along its outward normal by a profile h(s).

    Raw parameter is the base arc length s.  With t the base unit tangent,
    n the outward normal, and kappa the signed curvature (n' = kappa t,
    t' = -kappa n):

        gamma~   = gamma + h n
        gamma~'  = (1 + kappa h) t + h' n
        gamma~'' = (2 kappa h' + kappa' h) t + (h'' - kappa (1 + kappa h)) n
    """

    __slots__ = ("base", "_h", "_dh", "_d2h")

    def __init__(self, base, h, dh, d2h):
        self.base = base
        self._h = h
        self._dh = dh
        self._d2h = d2h
        s = np.linspace(0.0, base.length, 512)
        radial = 1.0 + base.curvature(s) * h(s)
        if np.min(radial) <= 1e-9:
            raise SelfIntersecting(
                "offset exceeds the local curvature radius")
        self._build_tables(0.0, base.length)

    def _panel_count(self):
        return max(64, int(self.base.length * 8192))

    def _frames(self, t):
        tan = self.base.tangent(t)
        n_out = -rot90(tan)
        return tan, n_out

    def _raw(self, t):
        tan, n_out = self._frames(t)
        h = np.asarray(self._h(t), float)
        return self.base.point(t) + h[..., None] * n_out

    def _raw_d1(self, t):
        tan, n_out = self._frames(t)
        k = np.asarray(self.base.curvature(t), float)
        h = np.asarray(self._h(t), float)
        dh = np.asarray(self._dh(t), float)
        return (1.0 + k * h)[..., None] * tan + dh[..., None] * n_out

    def _raw_d2(self, t):
        tan, n_out = self._frames(t)
        k = np.asarray(self.base.curvature(t), float)
        kp = np.asarray(self.base.curvature_derivative(t), float)
        h = np.asarray(self._h(t), float)
        dh = np.asarray(self._dh(t), float)
        d2h = np.asarray(self._d2h(t), float)
        return ((2.0 * k * dh + kp * h)[..., None] * tan
                + (d2h - k * (1.0 + k * h))[..., None] * n_out)

    def curvature_derivative(self, u):
        raise UnsupportedTable(
            "cannot take d(curvature)/ds across an existing offset window")

    def scaled(self, f):
        base = self.base.scaled(f)

        def remap(fn, order):
            return lambda s: f ** (1 - order) * np.asarray(fn(np.asarray(s) / f))

        return OffsetCurve(base, remap(self._h, 0),
                           remap(self._dh, 1), remap(self._d2h, 2))
