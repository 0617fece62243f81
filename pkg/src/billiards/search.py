"""Periodic orbit search, certification, and phase-space coverage.

Orbits of period tau are found as zeros of the chord-length gradient with a
damped Newton iteration (least-squares steps, so one-parameter families with
a singular Hessian still converge).  Every accepted orbit carries two
certificates: the gradient residual, and a dynamical re-trace through the
bounce map that must revisit each bounce parameter.  A second-order
nondegeneracy report is attached but not required — orbit families on
symmetric tables are legitimately degenerate.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd
from typing import Optional

import numpy as np

from .errors import (BilliardsError, CornerAdjacent, DegenerateChord,
                     DegenerateInput, GrazingRay, HitCorner,
                     InvalidConfiguration, NoConvergence, NoIntersection,
                     ObstructedOrbit)
from .geometry import Segment, unit
from .phase import PhasePoint, admissible_directions, billiard_map
from .table import (CurvatureBump, Table, perturb_curvature, table_fingerprint,
                    transfer_params)
from .variational import (NondegeneracyReport, _hessian_matrix,
                          assemble_hessian, check_nondegeneracy,
                          length_functional, length_gradient)

RESIDUAL_TOL = 1e-10   # sup-norm of the length gradient at an accepted orbit
CLOSURE_TOL = 1e-7     # arc-length mismatch allowed in the dynamical re-trace
DEDUP_TOL = 1e-6       # sup wrap-distance identifying two orbits

_CORNER_FAIL = 1e-4    # a solve stalling this close to a corner is blamed on it
_CHORD_FAIL = 1e-6     # ... and one with chords this short on chord collapse
_MAX_ITER = 100
_FALLBACK_STEPS = 50
_NEWTON_TRUST = 0.1    # sup-norm beyond which a Newton step is distrusted
_FAMILY_GRAD_TOL = 1e-8


def _wrap_diff(a, b):
    """Signed wrap-around difference a - b, each component in [-1/2, 1/2)."""
    return (np.asarray(a) - np.asarray(b) + 0.5) % 1.0 - 0.5


def _variants(params):
    """All cyclic rotations of both traversal orientations."""
    params = np.asarray(params, float)
    tau = len(params)
    out = []
    for base in (params, params[::-1]):
        for k in range(tau):
            out.append(np.roll(base, -k))
    return out


def _canonical(params):
    return min(_variants(params), key=lambda v: tuple(np.round(v, 12)))


@dataclass(eq=False)
class PeriodicOrbit:
    """A certified periodic bounce sequence.

    params : tau boundary parameters in bounce order (canonical rotation)
    length : total chord length (the orbit's action)
    residual : sup-norm of the length gradient at params
    closure : worst re-trace mismatch in arc length
    report : second-order nondegeneracy data at the orbit
    primitive : False when the sequence traverses a shorter orbit repeatedly
    """

    params: np.ndarray
    tau: int
    length: float
    residual: float
    closure: float
    report: NondegeneracyReport
    primitive: bool

    @property
    def nondegenerate(self) -> bool:
        return self.report.nondegenerate


# -- solver --------------------------------------------------------------

def _sup(v) -> float:
    return float(np.max(np.abs(v)))


class _EvalBudget:
    """Caps gradient evaluations per solve so hopeless seeds fail fast."""

    def __init__(self, table, limit=600):
        self.table = table
        self.left = limit

    def gradient(self, x):
        if self.left <= 0:
            return None
        self.left -= 1
        try:
            return length_gradient(self.table, x)
        except InvalidConfiguration:
            return None


def _merit_descent(budget, table, x, g):
    """Gradient descent on |g|^2/2 (direction -H g); used when Newton steps
    are untrustworthy far from a solution."""
    for _ in range(_FALLBACK_STEPS):
        if _sup(g) <= RESIDUAL_TOL:
            break
        h, _, _ = _hessian_matrix(table, x)
        d = -(h @ g)
        sup_d = _sup(d)
        if sup_d == 0.0:
            break
        alpha = min(1.0, 0.01 / sup_d)
        m0 = float(g @ g)
        improved = False
        while alpha >= 2.0 ** -20:
            x_new = (x + alpha * d) % 1.0
            g_new = budget.gradient(x_new)
            if g_new is not None and float(g_new @ g_new) < m0:
                x, g = x_new, g_new
                improved = True
                break
            alpha *= 0.5
        if not improved:
            break
    return x, g


def _solve(table, seed):
    """Drive the length gradient to zero; returns (params, gradient) at the
    last iterate whether or not it converged."""
    x = np.asarray(seed, float) % 1.0
    g = length_gradient(table, x)  # invalid seeds raise here
    budget = _EvalBudget(table)
    best_merit = float(g @ g)
    stall = 0
    for _ in range(_MAX_ITER):
        if _sup(g) <= RESIDUAL_TOL:
            return x, g
        if budget.left <= 0 or stall >= 8:
            break
        if np.any(table.corner_distance(x) <= 0.5 * _CORNER_FAIL):
            break  # sliding into a corner; let the caller classify it
        h, _, _ = _hessian_matrix(table, x)
        step, *_ = np.linalg.lstsq(h, -g, rcond=None)
        if _sup(step) > _NEWTON_TRUST:
            x, g = _merit_descent(budget, table, x, g)
        else:
            # backtracking on |g|^2; the Newton direction is always a
            # descent direction for it (g.H.(-H^+ g) = -|P g|^2)
            m0 = float(g @ g)
            alpha, accepted = 1.0, False
            while alpha >= 2.0 ** -20:
                x_new = (x + alpha * step) % 1.0
                g_new = budget.gradient(x_new)
                if g_new is not None and \
                        float(g_new @ g_new) <= (1.0 - 1e-4 * alpha) * m0:
                    x, g, accepted = x_new, g_new, True
                    break
                alpha *= 0.5
            if not accepted:
                x, g = _merit_descent(budget, table, x, g)
        merit = float(g @ g)
        if merit < 0.9 * best_merit:
            best_merit, stall = merit, 0
        else:
            stall += 1
    return x, g


def _classify_failure(table, x, context):
    if np.any(table.corner_distance(x) <= _CORNER_FAIL):
        raise CornerAdjacent(f"{context}: iterate stalled within "
                             f"{_CORNER_FAIL} of a corner")
    pts = table.point(x)
    chords = np.linalg.norm(np.roll(pts, -1, axis=0) - pts, axis=1)
    if float(np.min(chords)) <= _CHORD_FAIL:
        raise DegenerateChord(f"{context}: consecutive bounce points "
                              f"collapsed to {np.min(chords):.3e}")
    raise NoConvergence(f"{context}: no critical point within "
                        f"{_MAX_ITER} iterations")


def _retrace(table, params) -> float:
    """Dynamical certificate: push the orbit through the bounce map and
    measure the worst arc-length mismatch.  Raises ObstructedOrbit when the
    trace breaks (corner guard, tangency, a chord leaving the table) or
    lands away from the claimed bounce."""
    tau = len(params)
    pts = table.point(params)
    worst = 0.0
    for i in range(tau):
        arrive = unit(pts[i] - pts[i - 1])
        try:
            nxt = billiard_map(table, PhasePoint(float(params[i]), arrive))
        except (HitCorner, GrazingRay, NoIntersection,
                InvalidConfiguration) as exc:
            raise ObstructedOrbit(f"re-trace broke at bounce {i}: {exc}")
        miss = abs(float(_wrap_diff(nxt.param, params[(i + 1) % tau])))
        worst = max(worst, miss)
    if worst > CLOSURE_TOL:
        raise ObstructedOrbit(f"re-trace misses a bounce by {worst:.3e} "
                              f"(allowed {CLOSURE_TOL:.0e})")
    return worst


def _is_primitive(params) -> bool:
    tau = len(params)
    for d in range(1, tau):
        if tau % d == 0:
            if _sup(_wrap_diff(np.roll(params, d), params)) < DEDUP_TOL:
                return False
    return True


def find_periodic_orbit(table: Table, tau: int, seed) -> PeriodicOrbit:
    """Polish ``seed`` (tau boundary parameters) into a certified orbit.

    Raises CornerAdjacent / DegenerateChord / NoConvergence when the solve
    fails, and ObstructedOrbit when the critical point does not survive the
    dynamical re-trace.
    """
    tau = int(tau)
    if tau < 2:
        raise InvalidConfiguration("period must be at least 2")
    seed = np.asarray(seed, float)
    if seed.shape != (tau,):
        raise InvalidConfiguration(f"seed must supply exactly {tau} "
                                   "boundary parameters")
    try:
        x, g = _solve(table, seed)
    except InvalidConfiguration:
        _classify_failure(table, seed % 1.0, "seed rejected")
    if _sup(g) > RESIDUAL_TOL:
        _classify_failure(table, x, "solve stopped")

    params = _canonical(x)
    residual = _sup(length_gradient(table, params))
    closure = _retrace(table, params)
    report = check_nondegeneracy(assemble_hessian(table, params))
    return PeriodicOrbit(params=params, tau=tau,
                         length=length_functional(table, params),
                         residual=residual, closure=closure, report=report,
                         primitive=_is_primitive(params))


# -- deduplication -------------------------------------------------------

def _same_orbit(a: PeriodicOrbit, b: PeriodicOrbit) -> bool:
    if a.tau != b.tau:
        return False
    return any(_sup(_wrap_diff(v, a.params)) < DEDUP_TOL
               for v in _variants(b.params))


def _same_family(table: Table, a: PeriodicOrbit, b: PeriodicOrbit) -> bool:
    """Do a and b sit on one continuous family of critical configurations?

    Tested by checking the midpoint configuration: on a genuine family
    (rotations of a circle orbit, translates of a rectangle orbit) the
    average of two members is again critical; for separate orbits it is not
    (often it is not even admissible — the square's horizontal and vertical
    two-bounce orbits average onto the corners)."""
    if a.tau != b.tau:
        return False
    aligned = min(_variants(b.params),
                  key=lambda v: _sup(_wrap_diff(v, a.params)))
    mid = (a.params + 0.5 * _wrap_diff(aligned, a.params)) % 1.0
    try:
        g = length_gradient(table, mid)
    except InvalidConfiguration:
        return False
    return _sup(g) <= _FAMILY_GRAD_TOL


def multistart_search(table: Table, tau_max: int, n_seeds: int,
                      rng_seed: int = 0, tau_min: int = 2) -> list:
    """Seeded sweep over periods tau_min..tau_max with family-aware dedup.

    Returns one representative per distinct orbit (or orbit family) found,
    sorted by (period, length); repeated traversals of shorter orbits are
    kept but flagged non-primitive.
    """
    if tau_max < 2 or tau_min < 2 or tau_min > tau_max:
        raise DegenerateInput("need 2 <= tau_min <= tau_max")
    rng = np.random.default_rng(rng_seed)
    found: list[PeriodicOrbit] = []
    for tau in range(tau_min, tau_max + 1):
        for k in range(int(n_seeds)):
            seed = _stratified_seed(rng, tau, k, int(n_seeds))
            try:
                orbit = find_periodic_orbit(table, tau, seed)
            except BilliardsError:
                continue
            if any(_same_orbit(orbit, o) or _same_family(table, orbit, o)
                   for o in found if o.tau == orbit.tau):
                continue
            found.append(orbit)
    found.sort(key=lambda o: (o.tau, o.length))
    return found


def _stratified_seed(rng, tau: int, k: int, n_seeds: int) -> np.ndarray:
    """Seed k of n_seeds for period tau.

    Even-indexed seeds are jittered winding configurations
    s0 + j*w/tau (w = 1..tau//2): near-critical on convex tables, one
    stratum per rotation class.  Odd-indexed seeds are uniform with a
    stratified first coordinate, so orbits outside the winding ansatz
    stay reachable.
    """
    if k % 2 == 0:
        w_max = max(1, tau // 2)
        w = 1 + (k // 2) % w_max
        strata = max(1, (n_seeds + 1) // 2)
        s0 = ((k // 2) // w_max + rng.uniform()) / strata
        jitter = rng.uniform(-0.5, 0.5, size=tau) * (0.2 / tau)
        return (s0 + np.arange(tau) * (w / tau) + jitter) % 1.0
    seed = rng.uniform(0.0, 1.0, size=tau)
    seed[0] = ((k - 1) / 2 + seed[0]) / max(1, (n_seeds + 1) // 2)
    return seed


# -- phase-space coverage --------------------------------------------------

@dataclass(frozen=True)
class PhaseCell:
    """One cell of the (arc length, direction angle) grid.  The angle is
    measured from the boundary tangent toward the outward normal, so the
    admissible directions at a point sweep (0, pi)."""
    i: int
    j: int
    s_lo: float
    s_hi: float
    theta_lo: float
    theta_hi: float

    @property
    def center(self):
        return (0.5 * (self.s_lo + self.s_hi),
                0.5 * (self.theta_lo + self.theta_hi))


def phase_grid(n_s: int, n_theta: int) -> list:
    """Regular n_s x n_theta grid of PhaseCells covering [0,1) x (0, pi)."""
    if n_s < 1 or n_theta < 1:
        raise DegenerateInput("grid must have at least one cell per axis")
    cells = []
    for i in range(n_s):
        for j in range(n_theta):
            cells.append(PhaseCell(i=i, j=j,
                                   s_lo=i / n_s, s_hi=(i + 1) / n_s,
                                   theta_lo=j * np.pi / n_theta,
                                   theta_hi=(j + 1) * np.pi / n_theta))
    return cells


@dataclass(eq=False)
class CoverageReport:
    """Which phase cells are visited by the periodic orbits found."""
    table_id: str
    tau_max: int
    n_s: int
    n_theta: int
    visited: np.ndarray     # (n_s, n_theta) bool
    orbits: list
    attempts: int
    budget: int

    @property
    def coverage(self) -> float:
        return float(np.mean(self.visited))


def _orbit_states(table, params):
    """(s, theta) phase coordinates of every bounce, both traversal
    orientations."""
    pts = table.point(params)
    tan = table.tangent(params)
    nout = table.outward_normal(params)
    chords = np.roll(pts, -1, axis=0) - pts
    u = chords / np.linalg.norm(chords, axis=1)[:, None]
    states = []
    for arrive in (np.roll(u, 1, axis=0), -u):
        th = np.arctan2(np.einsum("ij,ij->i", arrive, nout),
                        np.einsum("ij,ij->i", arrive, tan))
        states.extend(zip(params.tolist(), th.tolist()))
    return states


def _mark(visited, states, n_s, n_theta):
    for s, th in states:
        i = min(int((s % 1.0) * n_s), n_s - 1)
        j = min(max(int(th / np.pi * n_theta), 0), n_theta - 1)
        visited[i, j] = True


def _rectangle_sides(table):
    """(width, height) when the table is a rectangle, else None."""
    if len(table.pieces) != 4 or len(table.corners) != 4:
        return None
    if not all(isinstance(p, Segment) for p in table.pieces):
        return None
    if any(abs(c.turn - np.pi / 2) > 1e-9 for c in table.corners):
        return None
    lengths = np.diff(table.offsets)
    if abs(lengths[0] - lengths[2]) > 1e-12 or \
            abs(lengths[1] - lengths[3]) > 1e-12:
        return None
    return float(lengths[0]), float(lengths[1])


def _rectangle_angles(w, h, tau_max):
    """Bounce angles of rectangle orbit families, keyed by wall parity.

    A family is a coprime pair (p, q) of half-period counts across the
    width/height; its period is 2(p+q) and on a horizontal wall it arrives
    at atan2(q h, p w) (or the mirror) from the tangent.
    """
    horiz, vert = [], []
    for total in range(1, tau_max // 2 + 1):
        for p in range(0, total + 1):
            q = total - p
            if gcd(p, q) != 1:
                continue
            tau = 2 * total
            phi_h = float(np.arctan2(q * h, p * w))
            phi_v = float(np.arctan2(p * w, q * h))
            if q > 0:  # touches horizontal walls transversally
                horiz.extend([(phi_h, p, q, tau), (np.pi - phi_h, p, q, tau)])
            if p > 0:
                vert.extend([(phi_v, p, q, tau), (np.pi - phi_v, p, q, tau)])
    return sorted(set(horiz)), sorted(set(vert))


def _trace_params(table, s0, theta, tau):
    """Bounce parameters obtained by tracing tau-1 bounces from the phase
    point (s0, theta)."""
    half = admissible_directions(table, s0)
    p = PhasePoint(float(s0), half.direction(theta))
    params = [float(s0)]
    for _ in range(tau - 1):
        p = billiard_map(table, p)
        params.append(float(p.param))
    return np.asarray(params)


def density_scan(table: Table, grid, tau_max: int, budget: int,
                 rng_seed: int = 0) -> CoverageReport:
    """Hunt periodic orbits cell by cell over the phase grid.

    ``grid`` is (n_s, n_theta).  Each attempt costs one orbit solve from a
    seed aimed at an uncovered cell; every orbit found marks all cells its
    bounces visit (in both traversal orientations).  On rectangles the seeds
    are built from the exact unfolding directions, so the scan is
    deterministic and cheap; elsewhere seeds are traced from jittered cell
    centers with per-cell random streams.
    """
    n_s, n_theta = int(grid[0]), int(grid[1])
    if n_s < 1 or n_theta < 1:
        raise DegenerateInput("grid must have at least one cell per axis")
    if tau_max < 2:
        raise DegenerateInput("tau_max must be at least 2")
    visited = np.zeros((n_s, n_theta), dtype=bool)
    orbits: list[PeriodicOrbit] = []
    attempts = 0

    def absorb(orbit):
        for known in orbits:
            if known.tau == orbit.tau and (_same_orbit(orbit, known)
                                           or _same_family(table, orbit,
                                                           known)):
                _mark(visited, _orbit_states(table, orbit.params),
                      n_s, n_theta)
                return
        orbits.append(orbit)
        _mark(visited, _orbit_states(table, orbit.params), n_s, n_theta)

    rect = _rectangle_sides(table)
    if rect is not None:
        w, h = rect
        horiz, vert = _rectangle_angles(w, h, tau_max)
        offsets = table.offsets
        for i in range(n_s):
            s_mid = (i + 0.5) / n_s
            wall = int(np.searchsorted(offsets, s_mid, side="right")) - 1
            cands = horiz if wall % 2 == 0 else vert
            for j in range(n_theta):
                if visited[i, j] or attempts >= budget:
                    continue
                th_lo, th_hi = j * np.pi / n_theta, (j + 1) * np.pi / n_theta
                # half-open to match how states are binned, so a family angle
                # sitting exactly on a cell edge belongs to the upper cell
                inside = [c for c in cands if th_lo <= c[0] < th_hi]
                if not inside:
                    continue
                th, _, _, tau = min(
                    inside, key=lambda c: abs(c[0] - 0.5 * (th_lo + th_hi)))
                for shift in (0.0, 0.11 / n_s, -0.13 / n_s):
                    if attempts >= budget:
                        break
                    attempts += 1
                    try:
                        seed = _trace_params(table, s_mid + shift, th, tau)
                        absorb(find_periodic_orbit(table, tau, seed))
                        break
                    except BilliardsError:
                        continue
        return CoverageReport(table_id=table_fingerprint(table),
                              tau_max=tau_max, n_s=n_s, n_theta=n_theta,
                              visited=visited, orbits=orbits,
                              attempts=attempts, budget=budget)

    streams = np.random.SeedSequence(rng_seed).spawn(n_s * n_theta)
    rngs = [np.random.default_rng(s) for s in streams]
    while attempts < budget and not visited.all():
        attempted = False
        for i in range(n_s):
            for j in range(n_theta):
                if visited[i, j] or attempts >= budget:
                    continue
                rng = rngs[i * n_theta + j]
                tau = 2 + int(rng.integers(0, tau_max - 1))
                s0 = (i + rng.uniform(0.2, 0.8)) / n_s
                th = (j + rng.uniform(0.2, 0.8)) * np.pi / n_theta
                attempts += 1
                attempted = True
                try:
                    seed = _trace_params(table, s0, th, tau)
                except BilliardsError:
                    seed = rng.uniform(0.0, 1.0, size=tau)
                try:
                    absorb(find_periodic_orbit(table, tau, seed))
                except BilliardsError:
                    continue
        if not attempted:
            break
    return CoverageReport(table_id=table_fingerprint(table),
                          tau_max=tau_max, n_s=n_s, n_theta=n_theta,
                          visited=visited, orbits=orbits,
                          attempts=attempts, budget=budget)


# -- persistence under curvature bumps -------------------------------------

@dataclass(eq=False)
class PersistenceReport:
    """Fate of an orbit under a localized curvature perturbation."""
    survived: bool
    displacement: float      # sup wrap-distance from the transferred seed
    obstruction: Optional[str]
    orbit_before: PeriodicOrbit
    orbit_after: Optional[PeriodicOrbit]
    perturbed: Table


def persistence_test(table: Table, orbit: PeriodicOrbit,
                     bump: CurvatureBump) -> PersistenceReport:
    """Perturb the table, transfer the orbit's parameters, re-solve.

    The displacement is measured against the transferred parameters, so a
    reported zero means the orbit is geometrically untouched (bump supported
    away from every chord) rather than merely re-found.
    """
    perturbed = perturb_curvature(table, bump)
    seed = transfer_params(table, perturbed, orbit.params)
    try:
        after = find_periodic_orbit(perturbed, orbit.tau, seed)
    except BilliardsError as exc:
        return PersistenceReport(survived=False, displacement=float("nan"),
                                 obstruction=type(exc).__name__,
                                 orbit_before=orbit, orbit_after=None,
                                 perturbed=perturbed)
    aligned = min(_variants(after.params),
                  key=lambda v: _sup(_wrap_diff(v, seed)))
    disp = _sup(_wrap_diff(aligned, seed))
    return PersistenceReport(survived=True, displacement=disp,
                             obstruction=None, orbit_before=orbit,
                             orbit_after=after, perturbed=perturbed)
