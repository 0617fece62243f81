"""Whole-library acceptance sweep.

One test per numbered criterion.  Each prints a single PASS/FAIL line with
the measured figures, so a verbose run doubles as a scorecard.  The orbit
pool fixture funnels every orbit produced anywhere in this file into the
global residual/closure audit (criterion 2).
"""

import time

import numpy as np
import pytest

from billiards import (BundleSample, CurvatureBump, alpha_distance,
                       approximate_by_rational_polygon, assemble_hessian,
                       build_polygon, build_smooth_curve, check_nondegeneracy,
                       curvature_sensitivity, density_scan,
                       find_periodic_orbit, length_functional, length_gradient,
                       multistart_search, persistence_test,
                       sample_unit_tangent_bundle, smooth_corners,
                       transfer_params)
from billiards.variational import _hessian_matrix

R = 1.0 / (2.0 * np.pi)

RESIDUAL_TOL = 1e-10
CLOSURE_TOL = 1e-7


def _line(capsys, num, ok, detail):
    # bypass capture so the scorecard shows up even on green runs
    with capsys.disabled():
        print(f"\nCRITERION {num:02d} {'PASS' if ok else 'FAIL'}  {detail}")


# ---------------------------------------------------------------- fixtures

@pytest.fixture(scope="session")
def circle_sweep(circle):
    t0 = time.perf_counter()
    orbits = multistart_search(circle, 5, 8, rng_seed=3)
    return orbits, time.perf_counter() - t0


@pytest.fixture(scope="session")
def square_orbits(square):
    return multistart_search(square, 2, 20, rng_seed=1)


@pytest.fixture(scope="session")
def ellipse_orbits(ellipse):
    return {
        "minor": find_periodic_orbit(ellipse, 2, [0.001, 0.501]),
        "major": find_periodic_orbit(ellipse, 2, [0.251, 0.751]),
        "tau3": find_periodic_orbit(ellipse, 3, [0.07, 0.4, 0.73]),
    }


@pytest.fixture(scope="session")
def smoothing_pair(square):
    orbit_sq = find_periodic_orbit(square, 2, [0.125, 0.625])
    sm = smooth_corners(square, 1e-3)
    seed = transfer_params(square, sm, orbit_sq.params)
    orbit_sm = find_periodic_orbit(sm, 2, seed)
    return orbit_sq, sm, orbit_sm


@pytest.fixture(scope="session")
def density_report(square):
    t0 = time.perf_counter()
    rep = density_scan(square, (10, 10), tau_max=40, budget=5000, rng_seed=7)
    return rep, time.perf_counter() - t0


@pytest.fixture(scope="session")
def persistence_reports(ellipse, ellipse_orbits):
    out = []
    for eps in (1e-3, 1e-4, 1e-5):
        bump = CurvatureBump(center=0.512, halfwidth=0.03, amplitude=eps)
        out.append((eps, persistence_test(ellipse, ellipse_orbits["minor"], bump)))
    return out


@pytest.fixture(scope="session")
def orbit_pool(circle_sweep, square_orbits, ellipse_orbits, smoothing_pair,
               density_report, persistence_reports):
    pool = list(circle_sweep[0]) + list(square_orbits)
    pool += list(ellipse_orbits.values())
    pool += [smoothing_pair[0], smoothing_pair[2]]
    pool += list(density_report[0].orbits)
    for _, rep in persistence_reports:
        pool.append(rep.orbit_before)
        if rep.orbit_after is not None:
            pool.append(rep.orbit_after)
    return pool


# ---------------------------------------------------------------- criteria

def test_criterion_01_circle_polygon_lengths(capsys, circle_sweep):
    """Multistart over periods 2..5 on the circle recovers every inscribed
    regular polygon length n*2r*sin(pi/n) to 1e-9, within ten seconds."""
    orbits, elapsed = circle_sweep
    worst = 0.0
    for n in (2, 3, 4, 5):
        want = n * 2.0 * R * np.sin(np.pi / n)
        best = min((abs(o.length - want) for o in orbits if o.tau == n),
                   default=np.inf)
        worst = max(worst, best)
    ok = worst <= 1e-9 and elapsed < 10.0
    _line(capsys, 1, ok, f"inscribed 2..5-gon length err {worst:.2e} (<=1e-9), "
                 f"{elapsed:.1f}s (<10s)")
    assert ok


def test_criterion_02_every_orbit_certified(capsys, orbit_pool):
    """No orbit anywhere in this suite ships with residual > 1e-10 or
    closure defect > 1e-7."""
    worst_res = max(o.residual for o in orbit_pool)
    worst_clo = max(o.closure for o in orbit_pool)
    ok = worst_res <= RESIDUAL_TOL and worst_clo <= CLOSURE_TOL
    _line(capsys, 2, ok, f"{len(orbit_pool)} orbits, residual <= {worst_res:.2e} "
                 f"(1e-10), closure <= {worst_clo:.2e} (1e-7)")
    assert ok


def test_criterion_03_derivatives_match_finite_differences(capsys, ellipse,
                                                           ellipse_orbits):
    """100 near-critical configurations: closed-form gradient within 1e-6
    and Hessian within 1e-5 of central differences, in under 30 seconds."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(2025)
    bases = [o.params for o in ellipse_orbits.values()]
    worst_g = worst_h = 0.0
    for i in range(100):
        base = bases[i % len(bases)]
        params = (base + rng.uniform(-2e-10, 2e-10, len(base))) % 1.0
        tau = len(params)
        g = length_gradient(ellipse, params)
        H = _hessian_matrix(ellipse, params)[0]
        hg, hh = 1e-6, 1e-5
        fd_g = np.zeros(tau)
        fd_h = np.zeros((tau, tau))
        for k in range(tau):
            up, dn = params.copy(), params.copy()
            up[k] += hg
            dn[k] -= hg
            fd_g[k] = (length_functional(ellipse, up)
                       - length_functional(ellipse, dn)) / (2 * hg)
            up, dn = params.copy(), params.copy()
            up[k] += hh
            dn[k] -= hh
            fd_h[:, k] = (length_gradient(ellipse, up)
                          - length_gradient(ellipse, dn)) / (2 * hh)
        worst_g = max(worst_g, np.max(np.abs(g - fd_g))
                      / max(1.0, np.max(np.abs(g))))
        worst_h = max(worst_h, np.max(np.abs(H - fd_h)) / np.max(np.abs(H)))
    # the public path must agree at the exactly-critical configurations too
    for base in bases:
        pub = assemble_hessian(ellipse, base).matrix
        assert np.array_equal(pub, _hessian_matrix(ellipse, base)[0])
    elapsed = time.perf_counter() - t0
    ok = worst_g <= 1e-6 and worst_h <= 1e-5 and elapsed < 30.0
    _line(capsys, 3, ok, f"grad err {worst_g:.2e} (<=1e-6), hess err {worst_h:.2e} "
                 f"(<=1e-5), {elapsed:.1f}s (<30s)")
    assert ok


def test_criterion_04_hessian_structure(capsys, circle):
    """Two-bounce off-diagonal is exactly the sum of the two chord terms;
    five-bounce Hessians are cyclic tridiagonal with structural zeros."""
    H2 = assemble_hessian(circle, [0.0, 0.5])
    exact2 = (H2.matrix[0, 1] == H2.offdiag[0] + H2.offdiag[1]
              and H2.matrix[1, 0] == H2.matrix[0, 1])
    params = (np.arange(5) / 5.0 + 0.04) % 1.0
    H5 = assemble_hessian(circle, params).matrix
    pattern_ok = True
    for i in range(5):
        for j in range(5):
            on_band = j in (i, (i + 1) % 5, (i - 1) % 5)
            pattern_ok &= (H5[i, j] != 0.0) if on_band else (H5[i, j] == 0.0)
    ok = exact2 and pattern_ok
    _line(capsys, 4, ok, f"2-bounce offdiag exact: {exact2}, 5-bounce cyclic "
                 f"tridiagonal zeros exact: {pattern_ok}")
    assert ok


def test_criterion_05_degeneracy_detection(capsys, circle, ellipse):
    """The circle's diameter family is flagged degenerate; both ellipse axis
    orbits are certified nondegenerate with a clear margin."""
    flat = check_nondegeneracy(assemble_hessian(circle, [0.0, 0.5]))
    minor = check_nondegeneracy(assemble_hessian(ellipse, [0.0, 0.5]))
    major = check_nondegeneracy(assemble_hessian(ellipse, [0.25, 0.75]))
    ok = (abs(flat.balanced_det) < 1e-8 and not flat.nondegenerate
          and abs(minor.balanced_det) > 1e-6 and minor.nondegenerate
          and abs(major.balanced_det) > 1e-6 and major.nondegenerate)
    _line(capsys, 5, ok, f"circle |det| {abs(flat.balanced_det):.1e} (<1e-8), "
                 f"ellipse |det| {abs(minor.balanced_det):.2f}/"
                 f"{abs(major.balanced_det):.2f} (>1e-6)")
    assert ok


def test_criterion_06_diagonal_tracks_curvature(capsys, ellipse, ellipse_orbits):
    """Across five bump amplitudes the bumped bounce's diagonal entry is an
    affine function of the realized curvature (relative fit residual 1e-5)
    and the far off-diagonal chord term stays put to 1e-9."""
    orb = ellipse_orbits["tau3"]
    amps = [-2e-8, -1e-8, 0.0, 1e-8, 2e-8]
    recs = curvature_sensitivity(ellipse, orb.params, 0, amps, halfwidth=0.01)
    kap = np.array([r.kappa for r in recs])
    a0 = np.array([r.diag[0] for r in recs])
    design = np.stack([np.ones_like(kap), kap], axis=1)
    coef, *_ = np.linalg.lstsq(design, a0, rcond=None)
    rel_resid = np.max(np.abs(design @ coef - a0)) / np.ptp(a0)
    far_b = np.array([r.offdiag[1] for r in recs])  # chord avoiding the bump
    drift = np.ptp(far_b)
    ok = rel_resid <= 1e-5 and drift <= 1e-9
    _line(capsys, 6, ok, f"a(kappa) line fit rel resid {rel_resid:.2e} (<=1e-5), "
                 f"far chord-term drift {drift:.2e} (<=1e-9)")
    assert ok


def test_criterion_07_phase_space_coverage(capsys, density_report):
    """A 10x10 phase grid on the square reaches 95% coverage inside the
    5000-attempt budget in under a minute."""
    rep, elapsed = density_report
    ok = rep.coverage >= 0.95 and elapsed < 60.0 and rep.attempts <= 5000
    _line(capsys, 7, ok, f"coverage {rep.coverage:.3f} (>=0.95) via {rep.attempts} "
                 f"attempts, {elapsed:.1f}s (<60s)")
    assert ok


def test_criterion_08_smoothing_fixes_midpoint_orbit(capsys, square, smoothing_pair):
    """Filleting the square's corners leaves the side-midpoint two-orbit in
    place up to the renormalization homothety."""
    orbit_sq, sm, orbit_sm = smoothing_pair
    worst = 0.0
    for s_old, s_new in zip(orbit_sq.params, orbit_sm.params):
        moved = sm.point(s_new)
        scaled = sm.scale * square.point(s_old)
        worst = max(worst, float(np.linalg.norm(moved - scaled)))
    ok = worst <= 1e-10 and orbit_sm.residual <= RESIDUAL_TOL
    _line(capsys, 8, ok, f"bounce displacement after homothety {worst:.2e} (<=1e-10)")
    assert ok


def test_criterion_09_persistence_scales_linearly(capsys, persistence_reports):
    """Bumping the boundary at a bounce point moves the minor-axis orbit
    proportionally to the amplitude over three decades (factor two)."""
    ratios = []
    for eps, rep in persistence_reports:
        assert rep.survived, f"orbit lost at amplitude {eps}"
        ratios.append(rep.displacement / eps)
    spread = max(ratios) / min(ratios)
    ok = spread <= 2.0
    _line(capsys, 9, ok, "displacement/eps = "
          + "/".join(f"{r:.1f}" for r in ratios)
          + f", spread x{spread:.2f} (<=2)")
    assert ok


def test_criterion_10_metric_properties(capsys, square, circle):
    """Metric axioms hold to 1e-12 on 100 random sample triples; a rigid
    translation by d costs exactly d; fillets of radius rho cost at most
    4*rho."""
    rng = np.random.default_rng(77)

    def cloud():
        m = int(rng.integers(3, 25))
        t = rng.normal(size=(m, 2))
        return BundleSample(points=rng.uniform(-1, 1, (m, 2)),
                            tangents=t / np.linalg.norm(t, axis=1)[:, None],
                            n=m, table_id="synthetic")

    axiom_slack = 0.0
    for _ in range(100):
        a, b, c = cloud(), cloud(), cloud()
        assert alpha_distance(a, a) == 0.0
        dab, dba = alpha_distance(a, b), alpha_distance(b, a)
        assert dab == dba
        axiom_slack = max(axiom_slack, dab - (alpha_distance(a, c)
                                              + alpha_distance(c, b)))
    trans_err = 0.0
    th = 2.0 * np.pi * np.arange(128) / 128
    ring = np.stack([R * np.cos(th), R * np.sin(th)], axis=1)
    base_c = build_smooth_curve(ring)
    for d in (0.01, 0.05, 0.12):
        moved = build_smooth_curve(ring + [d, 0.0])
        a = alpha_distance(sample_unit_tangent_bundle(base_c, 500),
                           sample_unit_tangent_bundle(moved, 500))
        trans_err = max(trans_err, abs(a - d))
    d = 0.013
    sq_moved = build_polygon([(4 * d, 0.0), (1 + 4 * d, 0.0),
                              (1 + 4 * d, 1.0), (4 * d, 1.0)])
    a = alpha_distance(sample_unit_tangent_bundle(square, 500),
                       sample_unit_tangent_bundle(sq_moved, 500))
    trans_err = max(trans_err, abs(a - d))

    smooth_margin = 0.0
    for rho in (1e-2, 1e-3):
        sm = smooth_corners(square, rho)
        a = alpha_distance(sample_unit_tangent_bundle(square, 2000),
                           sample_unit_tangent_bundle(sm, 2000))
        smooth_margin = max(smooth_margin, a / (4.0 * rho))

    ok = (axiom_slack <= 1e-12 and trans_err <= 1e-12
          and smooth_margin <= 1.0)
    _line(capsys, 10, ok, f"triangle slack {axiom_slack:.1e} (<=1e-12), translation "
                  f"err {trans_err:.1e} (<=1e-12), fillet alpha/(4rho) "
                  f"{smooth_margin:.2f} (<=1)")
    assert ok


def test_criterion_11_rational_approximation_of_circle(capsys, circle):
    """At tolerance 0.05 the circle admits an exact rational-angle polygon
    within 0.05 in the bundle metric."""
    approx = approximate_by_rational_polygon(circle, 0.05)
    a = alpha_distance(sample_unit_tangent_bundle(circle, 4000),
                       sample_unit_tangent_bundle(approx, 4000))
    ok = approx.is_rational and a <= 0.05
    _line(capsys, 11, ok, f"{len(approx.pieces)}-gon, exact rational angles, "
                  f"alpha {a:.4f} (<=0.05)")
    assert ok
