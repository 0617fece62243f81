import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from billiards import (AtCorner, CurvatureBump, DegenerateInput,
                       RadiusTooLarge, SelfIntersecting, SupportHitsCorner,
                       UnsupportedTable, build_polygon, build_smooth_curve,
                       corner_set, perturb_curvature, smooth_corners,
                       transfer_params)

params_st = st.floats(min_value=-3.0, max_value=3.0, allow_nan=False,
                      allow_infinity=False)


def test_square_normalization(square):
    assert square.perimeter == pytest.approx(1.0, abs=1e-12)
    assert square.scale == pytest.approx(0.25)
    assert np.array_equal(square.offsets, [0.0, 0.25, 0.5, 0.75, 1.0])
    assert np.allclose(square.point(0.125), [0.125, 0.0])
    assert np.allclose(square.point(0.625), [0.125, 0.25])


def test_square_corners(square):
    cs = corner_set(square)
    assert [c.param for c in cs] == [0.0, 0.25, 0.5, 0.75]
    for c in cs:
        assert c.turn == pytest.approx(np.pi / 2)
        # interior corner: incoming tangent rotates left onto outgoing
        cross = c.tangent_in[0] * c.tangent_out[1] - c.tangent_in[1] * c.tangent_out[0]
        assert cross > 0


def test_square_evaluate_flat_side(square):
    bp = square.evaluate(0.125)
    assert np.allclose(bp.tangent, [1.0, 0.0])
    assert np.allclose(bp.outward_normal, [0.0, -1.0])
    assert bp.curvature == 0.0


def test_evaluate_at_corner_raises(square):
    with pytest.raises(AtCorner):
        square.evaluate(0.0)
    with pytest.raises(AtCorner):
        square.evaluate(0.75)
    # 1e-12 snap window around each corner
    with pytest.raises(AtCorner):
        square.evaluate(0.25 + 5e-13)


def test_right_triangle_side_lengths():
    # perimeter 12 -> sides 3,5,4 become 1/4, 5/12, 1/3 (canonical start (0,0))
    tri = build_polygon([(0.0, 0.0), (3.0, 0.0), (0.0, 4.0)])
    lengths = [p.length for p in tri.pieces]
    assert lengths == pytest.approx([1.0 / 4.0, 5.0 / 12.0, 1.0 / 3.0], abs=1e-14)


def test_homothetic_polygons_build_identically():
    """Scaling every vertex by 7 must not change the normalized table at all."""
    tri = build_polygon([(0.0, 0.0), (3.0, 0.0), (0.0, 4.0)])
    tri7 = build_polygon([(0.0, 0.0), (21.0, 0.0), (0.0, 28.0)])
    for s in np.linspace(0.01, 0.99, 17):
        assert np.array_equal(tri.point(s), tri7.point(s))
        assert np.array_equal(tri.tangent(s), tri7.tangent(s))


def test_vertex_rotation_is_canonicalized_away(square):
    rolled = build_polygon([(1.0, 0.0), (1.0, 1.0), (0.0, 1.0), (0.0, 0.0)])
    for s in np.linspace(0.01, 0.99, 13):
        assert np.allclose(rolled.point(s), square.point(s), atol=1e-12)


def test_degenerate_polygon_inputs():
    with pytest.raises(DegenerateInput):
        build_polygon([(0.0, 0.0), (1.0, 0.0)])
    with pytest.raises(DegenerateInput):
        build_polygon([(0.0, 0.0), (1.0, 0.0), (1.0, 0.0), (0.0, 1.0)])
    with pytest.raises(DegenerateInput):
        # zero signed area (bowtie collapses in the shoelace sum)
        build_polygon([(0.0, 0.0), (1.0, 1.0), (1.0, 0.0), (0.0, 1.0)])
    with pytest.raises(SelfIntersecting):
        build_polygon([(0.0, 0.0), (2.0, 0.0), (2.0, 2.0), (1.0, -1.0), (0.0, 2.0)])


def test_smooth_curve_too_few_points():
    with pytest.raises(DegenerateInput):
        build_smooth_curve(np.array([(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]))


def test_circle_curvature_and_normal(circle):
    for s in (0.05, 0.3, 0.62, 0.9):
        assert circle.curvature(s) == pytest.approx(2.0 * np.pi, rel=1e-9)
        bp = circle.evaluate(s)
        # outward normal of a circle about the origin is the unit position
        assert np.allclose(bp.outward_normal,
                           bp.point / np.linalg.norm(bp.point), atol=1e-9)


def test_tangent_matches_finite_differences(ellipse):
    h = 1e-7
    ss = np.linspace(0.0, 1.0, 1001)[:-1] + 3e-4
    for s in ss[::10]:
        fd = (ellipse.point(s + h) - ellipse.point(s - h)) / (2.0 * h)
        assert np.allclose(ellipse.tangent(s), fd, atol=1e-6)


def test_curvature_matches_finite_differences(ellipse):
    h = 1e-5
    for s in np.linspace(0.03, 0.97, 29):
        dt = (ellipse.tangent(s + h) - ellipse.tangent(s - h)) / (2.0 * h)
        assert abs(np.linalg.norm(dt) - abs(ellipse.curvature(s))) \
            <= 1e-4 * abs(ellipse.curvature(s))


@given(s=params_st)
@settings(max_examples=60, deadline=None)
def test_tangent_is_unit_and_periodic(s):
    tri = build_polygon([(0.0, 0.0), (3.0, 0.0), (0.0, 4.0)])
    if tri.corner_distance(s % 1.0) < 1e-6:
        return
    t = tri.tangent(s)
    assert np.linalg.norm(t) == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(tri.point(s), tri.point(s + 1.0), atol=1e-12)


def test_smooth_corners_square(square):
    sm = smooth_corners(square, 1e-3)
    assert len(sm.pieces) == 8  # 4 sides + 4 fillet arcs
    assert len(sm.corners) == 0
    assert sm.perimeter == pytest.approx(1.0, abs=1e-12)
    # fillets trim perimeter, so renormalization scales the table up a hair
    assert 1.0 < sm.scale < 1.01
    # fillet curvature is 1/(rho * scale) after renormalization
    fillet = [p for p in sm.pieces if p.length < 0.01][0]
    s_mid = None
    acc = 0.0
    for p in sm.pieces:
        if p is fillet:
            s_mid = acc + 0.5 * p.length
            break
        acc += p.length
    assert sm.curvature(s_mid) == pytest.approx(1.0 / (1e-3 * sm.scale), rel=1e-9)


def test_smooth_corners_subset(square):
    sm = smooth_corners(square, 1e-3, corner_subset=[0.25])
    assert len(sm.corners) == 3


def test_smooth_corners_errors(square, circle):
    with pytest.raises(RadiusTooLarge):
        smooth_corners(square, 0.2)
    with pytest.raises(UnsupportedTable):
        smooth_corners(circle, 1e-3)


def test_perturb_curvature_off_support(circle):
    """Outside the bump window the table is the same up to the homothety."""
    bump = CurvatureBump(center=0.3, halfwidth=0.05, amplitude=1e-3)
    pert = perturb_curvature(circle, bump)
    lam = bump.homothety_ratio
    assert pert.perimeter == pytest.approx(1.0, abs=1e-12)
    for s in (0.1, 0.2, 0.4, 0.7, 0.95):
        t = transfer_params(circle, pert, np.array([s]))[0]
        assert abs(pert.curvature(t) * lam - circle.curvature(s)) <= 1e-9
        assert np.allclose(pert.point(t), circle.point(s) * lam, atol=1e-12)


def test_perturb_curvature_changes_support(circle):
    bump = CurvatureBump(center=0.3, halfwidth=0.05, amplitude=1e-3)
    pert = perturb_curvature(circle, bump)
    lam = bump.homothety_ratio
    delta = pert.curvature(0.3) * lam - circle.curvature(0.3)
    # peak curvature change tracks the amplitude to first order
    assert np.sign(delta) == np.sign(1e-3)
    assert 0.1 * abs(delta) <= abs(bump.amplitude) * 2.0 * np.pi * 100


def test_perturb_zero_amplitude_is_identity(circle):
    pert = perturb_curvature(circle, CurvatureBump(0.3, 0.05, 0.0))
    assert pert is circle


def test_perturb_support_must_avoid_corners(square):
    with pytest.raises(SupportHitsCorner):
        perturb_curvature(square, CurvatureBump(0.125, 0.2, 1e-4))


def test_transfer_params_identity(square):
    p = np.array([0.1, 0.6, 1.3])
    assert np.array_equal(transfer_params(square, square, p), p % 1.0)
