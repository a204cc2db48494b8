import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from magbilliard.billiard import (
    GeodesicCircleBoundary,
    MagneticBilliard,
    ParametricBoundary,
    PhasePoint,
    area_jacobian,
    billiard_map,
    check_admissible,
    check_reflection_invariance,
    curvature,
    orbit,
    reflect,
    sampled_boundary,
    step,
)
from magbilliard.exceptions import AmbiguousImpact, NotAdmissible
from magbilliard.geometry import Surface, geodesic_distance, j_rotate, metric_inner
from magbilliard.magnetic import MagneticParams, larmor_center

from .conftest import KINDS


def quiet_fit(est):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return est.fit()


# -- boundary curves --------------------------------------------------------


def test_circle_curvature_examples():
    assert curvature(GeodesicCircleBoundary("sphere", np.pi / 4), 0.3) == pytest.approx(1.0, abs=1e-8)
    assert curvature(GeodesicCircleBoundary("hyperbolic", 1.0), 0.3) == pytest.approx(1.3130352854993312, abs=1e-8)
    assert curvature(GeodesicCircleBoundary("sphere", np.pi / 2), 0.3) == pytest.approx(0.0, abs=1e-8)


@pytest.mark.parametrize("kind", KINDS)
def test_circle_fd_curvature_matches_closed_form(kind):
    b = GeodesicCircleBoundary(kind, 0.8)
    s = b.grid(16)
    assert np.allclose(curvature(b, s, method="fd"), b.curvature(s), atol=1e-8)


def test_ellipse_fd_curvature_matches_analytic(ellipse21):
    s = ellipse21.grid(64)
    assert np.allclose(curvature(ellipse21, s, method="fd"), ellipse21.curvature(s), atol=1e-8)


def test_ellipse_boundary_invariants(ellipse21):
    b = ellipse21
    x0, t0 = b.evaluate(np.array([0.0, b.period]))
    assert np.allclose(x0[0], x0[1], atol=1e-10)
    s = np.linspace(0, b.period, 777)
    x, t = b.evaluate(s)
    assert np.allclose(metric_inner(b.kind, t, t), 1, atol=1e-8)
    # unit speed in the arc-length parameter itself
    h = 1e-6
    fd = (b.evaluate(s + h)[0] - b.evaluate(s - h)[0]) / (2 * h)
    assert np.allclose(fd, t, atol=1e-8)
    # domain on the left: J gamma' points toward the pole, which is inside
    assert np.all(metric_inner(b.kind, j_rotate(b.kind, x, t), np.array([0, 0, 1.0])) > 0)
    assert np.all(b.curvature(s) > 0)


def test_projection_recovers_parameter(ellipse21):
    s = np.linspace(0.1, ellipse21.period - 0.1, 50)
    x, _ = ellipse21.evaluate(s)
    assert np.allclose(ellipse21.project(x), s, atol=1e-10)


def test_reversed_lift_is_reoriented():
    def lift(t):
        c, s = np.cos(-t), np.sin(-t)
        z = np.zeros_like(t)
        return (np.stack([0.5 * c, 0.3 * s, np.ones_like(t)], -1),
                np.stack([0.5 * s, -0.3 * c, z], -1),
                np.stack([-0.5 * c, -0.3 * s, z], -1))

    b = ParametricBoundary("sphere", lift)
    assert np.all(b.curvature(b.grid(64)) > 0)


def test_self_intersecting_curve_rejected():
    def lift(t):
        # figure-eight in the tangent plane at the pole
        z = np.zeros_like(t)
        P = np.stack([0.4 * np.sin(t), 0.4 * np.sin(t) * np.cos(t), np.ones_like(t)], -1)
        dP = np.stack([0.4 * np.cos(t), 0.4 * np.cos(2 * t), z], -1)
        ddP = np.stack([-0.4 * np.sin(t), -0.8 * np.sin(2 * t), z], -1)
        return P, dP, ddP

    with pytest.raises(ValueError, match="self-intersects"):
        ParametricBoundary("sphere", lift)


@pytest.mark.parametrize("kind", KINDS)
def test_sampled_boundary_reproduces_circle(kind):
    exact = GeodesicCircleBoundary(kind, 0.7)
    pts, _ = exact.evaluate(exact.grid(64))
    b = sampled_boundary(kind, pts)
    assert b.period == pytest.approx(exact.period, rel=1e-10)
    assert np.allclose(b.curvature(b.grid(32)), exact.curvature(0.0), atol=1e-8)


def test_admissibility_examples(ellipse21):
    b = GeodesicCircleBoundary("sphere", 0.5)
    assert check_admissible(b, MagneticParams.from_beta("sphere", 1.0)) == pytest.approx(1 / np.tan(0.5) - 1)
    with pytest.raises(NotAdmissible):
        check_admissible(b, MagneticParams.from_beta("sphere", 2.0))
    assert check_admissible(ellipse21, MagneticParams.from_beta("sphere", 0.2)) == pytest.approx(0.05, abs=1e-9)


# -- reflection -------------------------------------------------------------


def test_reflect_examples():
    k = Surface.HYPERBOLIC
    a = 0.37
    out = reflect(np.array([np.cos(a), np.sin(a), 0]), np.array([0, 1.0, 0]), k)
    assert np.allclose(out, [np.cos(a), -np.sin(a), 0])
    n = np.array([0, 1.0, 0])
    assert np.allclose(reflect(n, n, k), -n)
    assert np.allclose(reflect(np.array([1.0, 0, 0]), n, k), [1, 0, 0])


@pytest.mark.parametrize("kind", KINDS)
@given(a=st.floats(0, 2 * np.pi), b=st.floats(0, 2 * np.pi))
def test_reflect_involutive_isometry(kind, a, b):
    x = np.array([0.0, 0.0, 1.0])
    v = np.array([np.cos(a), np.sin(a), 0])
    n = np.array([np.cos(b), np.sin(b), 0])
    w = reflect(v, n, kind)
    assert np.allclose(reflect(w, n, kind), v, atol=1e-12)
    assert metric_inner(kind, w, w) == pytest.approx(1.0, abs=1e-12)
    assert metric_inner(kind, w, x) == pytest.approx(0.0, abs=1e-12)


# -- dynamics ---------------------------------------------------------------


def test_normal_start_keeps_angle(round_billiard):
    est = round_billiard
    _, v = est.outgoing_state(est.phase_point(0.0, np.pi / 2))
    assert est.step(0.0, v).theta == pytest.approx(np.pi / 2, abs=1e-9)


@pytest.mark.parametrize("s0,th0", [(0.3, 1.0), (2.0, 0.4), (4.4, 2.7)])
def test_time_reversal(ellipse_billiard, s0, th0):
    est = ellipse_billiard
    _, v = est.outgoing_state(est.phase_point(s0, th0))
    hit = est.step(s0, v)
    back = est.step(hit.s, -hit.v_in, reverse=True)
    assert back.s == pytest.approx(s0, abs=1e-9)
    assert np.allclose(back.v_in, -v, atol=1e-9)


def test_ellipse_short_orbit_on_boundary(ellipse_billiard, ellipse21):
    est = ellipse_billiard
    _, v = est.outgoing_state(est.phase_point(1.0, 1.1))
    s = 1.0
    for _ in range(10):
        hit = est.step(s, v)
        assert abs(ellipse21.cone_residual(hit.x)) < 1e-9
        s, v = hit.s, hit.v_out


def test_impact_residual_contract(ellipse_billiard, ellipse21):
    est = ellipse_billiard
    for P in est.orbit(est.phase_point(0.2, 0.9), 30)[1:]:
        x, _ = ellipse21.evaluate(np.array(P.s))
        assert abs(ellipse21.cone_residual(x)) < 1e-11


def test_map_center_is_outgoing_center(ellipse_billiard):
    est = ellipse_billiard
    P = est.phase_point(0.5, 1.3)
    hit = est.impact(P)
    Q = est.map(P)
    assert np.allclose(larmor_center(hit.x, hit.v_out, est.params_), Q.center, atol=1e-10)


def test_map_and_step_agree_for_100_iterations(ellipse_billiard):
    est = ellipse_billiard
    P = est.phase_point(0.3, 1.2)
    s, (_, v) = 0.3, est.outgoing_state(P)
    for _ in range(100):
        hit = est.step(s, v)
        P = est.map(P)
        assert P.s == pytest.approx(hit.s, abs=1e-9)
        assert P.theta == pytest.approx(hit.theta, abs=1e-9)
        s, v = hit.s, hit.v_out


def test_round_case_preserves_height(round_billiard):
    est = round_billiard
    P = est.phase_point(0.1, 0.8)
    for _ in range(50):
        Q = est.map(P)
        assert Q.center[2] == pytest.approx(P.center[2], abs=1e-9)
        P = Q


def test_hyperbolic_round_case_preserves_height():
    est = quiet_fit(MagneticBilliard(GeodesicCircleBoundary("hyperbolic", 1.0), r=1.2))
    pts = est.orbit(est.phase_point(0.0, 1.0), 50)
    z = np.array([P.center[2] for P in pts])
    assert np.ptp(z) < 1e-8


def test_symmetric_orbit_rotates(round_billiard):
    est = round_billiard
    pts = est.orbit(est.phase_point(0.0, np.pi / 2), 5)
    ang = np.unwrap([np.arctan2(P.center[1], P.center[0]) for P in pts])
    assert np.allclose(np.diff(ang), np.diff(ang)[0], atol=1e-9)
    assert np.allclose([geodesic_distance(Surface.SPHERE, P.center, [0, 0, 1]) for P in pts],
                       geodesic_distance(Surface.SPHERE, pts[0].center, [0, 0, 1]), atol=1e-9)


def test_orbit_edges(round_billiard, ellipse_billiard):
    P0 = round_billiard.phase_point(0.0, 1.0)
    assert round_billiard.orbit(P0, 0) == [P0]
    pts = ellipse_billiard.orbit(ellipse_billiard.phase_point(0.7, 1.4), 40)
    assert all(ellipse_billiard.in_phase_space(P.center, tol=1e-9) for P in pts)


def test_functional_wrappers(ellipse21):
    m = MagneticParams.from_beta("sphere", 1.0)
    est = quiet_fit(MagneticBilliard(ellipse21, beta=1.0))
    P = est.phase_point(0.4, 1.0)
    _, v = est.outgoing_state(P)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        assert step(ellipse21, m, 0.4, v).s == pytest.approx(billiard_map(ellipse21, m, P).s, abs=1e-10)
        assert len(orbit(ellipse21, m, P, 3)) == 4
        assert area_jacobian(ellipse21, m, P) == pytest.approx(1.0, abs=1e-4)
        assert check_reflection_invariance(ellipse21, m, lambda c: 3.0, [P]) == 0.0


def test_area_preserved_round(round_billiard):
    for P in round_billiard.random_phase_points(5, rng=3):
        assert round_billiard.area_jacobian(P) == pytest.approx(1.0, abs=1e-5)


def test_area_jacobian_error_is_fourth_order(ellipse_billiard):
    P = ellipse_billiard.phase_point(0.014, 0.136)  # near-grazing: large derivatives of the map
    e1 = abs(ellipse_billiard.area_jacobian(P, h=1e-4) - 1)
    e2 = abs(ellipse_billiard.area_jacobian(P, h=1e-5) - 1)
    assert 5e3 < e1 / e2 < 2e4


def test_reflection_invariance(round_billiard, ellipse_billiard):
    S = round_billiard.random_phase_points(20, rng=1)
    assert round_billiard.reflection_invariance(lambda c: c[2], S) < 1e-9
    S = ellipse_billiard.random_phase_points(20, rng=1)
    assert ellipse_billiard.reflection_invariance(lambda c: c[2], S) > 1e-3


def test_multiple_exits_without_chord_are_reported(ellipse_billiard):
    # inadmissible: this Larmor circle leaves the ellipse twice and the bare
    # center carries nothing to pick the branch
    c = np.array([0.20567041411149972, 0.0, 0.9786213163216936])
    with pytest.raises(AmbiguousImpact):
        ellipse_billiard.map(PhasePoint(c))


# -- estimator protocol -------------------------------------------------------


def test_estimator_api(ellipse21):
    est = MagneticBilliard(ellipse21, beta=0.2)
    assert est.get_params()["beta"] == 0.2
    twin = clone(est)
    assert twin.get_params()["beta"] == 0.2
    assert type(twin.boundary) is type(ellipse21)
    with pytest.raises(NotFittedError):
        est.transform(np.zeros((1, 3)))
    est.fit()
    assert est.admissible_ and est.admissibility_margin_ == pytest.approx(0.05, abs=1e-9)
    assert est.phase_point(0.0, 1.2).has_chord
    c = np.array([[np.sin(0.5), 0.0, np.cos(0.5)], [0.0, np.sin(0.6), np.cos(0.6)]])
    out = MagneticBilliard(GeodesicCircleBoundary("sphere", 1.0), r=1.2).fit_transform(c)
    assert out.shape == (2, 3)
    assert np.allclose(np.linalg.norm(out, axis=1), 1.0)


def test_estimator_validation(ellipse21):
    with pytest.raises(ValueError):
        MagneticBilliard(ellipse21).fit()
    with pytest.raises(ValueError):
        MagneticBilliard(ellipse21, beta=1.0, r=0.5).fit()
    with pytest.raises(NotAdmissible):
        MagneticBilliard(ellipse21, beta=1.0, strict=True).fit()
    with pytest.warns(RuntimeWarning):
        MagneticBilliard(ellipse21, beta=1.0).fit()
    est = MagneticBilliard(ellipse21, beta=0.2).fit()
    with pytest.raises(ValueError):
        est.transform(np.zeros((2, 2)))
