"""The bounce map on the unit tangent bundle of the boundary.

A phase point is (s, v): an arc-length parameter and a unit vector in the
closed outward half-circle at s (v . n_out >= 0).  One step reflects v across
the tangent line, traces the ray to its first boundary hit, and returns the
hit parameter with the travel direction (which points outward there).
Tangential directions are fixed points of the map.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (GrazingRay, HitCorner, InvalidConfiguration)

TOL_TANGENT = 1e-8   # |v . n| below this counts as tangential
CORNER_GUARD = 1e-7  # arc-length protection radius around corners
T_MIN = 1e-9         # minimum chord length along a traced ray


@dataclass(eq=False)
class PhasePoint:
    param: float
    direction: np.ndarray

    def __post_init__(self):
        self.direction = np.asarray(self.direction, float)


@dataclass(eq=False)
class Trajectory:
    states: list
    termination: str  # completed | grazing | hit_corner | step_limit


@dataclass(eq=False)
class HalfCircle:
    """Closed half-circle of admissible directions at a boundary point."""
    param: float
    tangent: np.ndarray
    outward_normal: np.ndarray

    def contains(self, v, tol=TOL_TANGENT):
        v = np.asarray(v, float)
        return bool(np.dot(v, self.outward_normal) >= -tol)

    def direction(self, angle_from_tangent):
        """Unit vector at the given angle in [0, pi] measured from the
        tangent toward the outward normal."""
        a = float(angle_from_tangent)
        return np.cos(a) * self.tangent + np.sin(a) * self.outward_normal


def admissible_directions(table, s):
    """The closed outward half-circle F(s); corner parameters are rejected
    by the underlying pointwise evaluation."""
    bp = table.evaluate(s)
    return HalfCircle(param=bp.param, tangent=bp.tangent,
                      outward_normal=bp.outward_normal)


def _check_direction(v):
    v = np.asarray(v, float)
    nv = np.linalg.norm(v)
    if not 0.999999 < nv < 1.000001:
        raise InvalidConfiguration(f"direction must be a unit vector "
                                   f"(norm {nv:.6g})")
    return v / nv


def billiard_map(table, p):
    """One bounce.  Raises HitCorner when the source or the landing point is
    inside the corner guard, GrazingRay when the landing is tangential."""
    s = float(table.wrap(p.param))
    if table.corner_distance(s) <= CORNER_GUARD:
        raise HitCorner(f"source parameter {s:.12g} is inside the corner "
                        f"guard")
    v = _check_direction(p.direction)
    bp = table.evaluate(s)
    vn = float(np.dot(v, bp.outward_normal))
    if vn < -TOL_TANGENT:
        raise InvalidConfiguration("direction points into the table")
    if abs(vn) <= TOL_TANGENT:
        return PhasePoint(s, v)          # tangential: fixed point
    w = v - 2.0 * vn * bp.outward_normal
    t, s_hit = table.ray_hit(bp.point, w, T_MIN)
    if table.corner_distance(s_hit) <= CORNER_GUARD:
        raise HitCorner(f"ray landed inside the corner guard at "
                        f"{s_hit:.12g}")
    n_hit = table.outward_normal(s_hit)
    if abs(float(np.dot(w, n_hit))) < TOL_TANGENT:
        raise GrazingRay(f"tangential landing at {s_hit:.12g}")
    return PhasePoint(float(s_hit), w)


def iterate(table, start, steps):
    """Iterate the bounce map.  Terminations: 'completed' after the requested
    number of steps, 'grazing' on a tangential fixed point or tangential
    landing, 'hit_corner' when a ray enters the corner guard."""
    states = [PhasePoint(float(table.wrap(start.param)),
                         _check_direction(start.direction))]
    for _ in range(int(steps)):
        try:
            nxt = billiard_map(table, states[-1])
        except HitCorner:
            return Trajectory(states, "hit_corner")
        except GrazingRay:
            return Trajectory(states, "grazing")
        prev = states[-1]
        if (abs(nxt.param - prev.param) < 1e-15
                and float(np.max(np.abs(nxt.direction - prev.direction)))
                < 1e-15):
            states.append(nxt)
            return Trajectory(states, "grazing")
        states.append(nxt)
    return Trajectory(states, "completed")
