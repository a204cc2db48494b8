import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from magbilliard.geometry import (
    Surface,
    arc_cot,
    check_surface_point,
    check_unit_tangent,
    exp_map,
    geodesic_circle,
    geodesic_distance,
    geodesic_velocity,
    j_rotate,
    lam,
    metric_inner,
    normalize_point,
    normalize_tangent,
    rotate_about,
    tangent_frame,
)

from .conftest import KINDS, random_states

finite = st.floats(-3, 3, allow_nan=False)


@pytest.mark.parametrize("kind", KINDS)
def test_j_is_quarter_turn(kind):
    x, v = random_states(kind, 50, 1)
    Jv = j_rotate(kind, x, v)
    assert np.allclose(metric_inner(kind, Jv, x), 0, atol=1e-12)
    assert np.allclose(metric_inner(kind, Jv, Jv), 1, atol=1e-12)
    assert np.allclose(metric_inner(kind, Jv, v), 0, atol=1e-12)
    assert np.allclose(j_rotate(kind, x, Jv), -v, atol=1e-12)


def test_hyperbolic_j_at_apex_matches_plane_rotation():
    x = np.array([0.0, 0.0, 1.0])
    assert np.allclose(j_rotate(Surface.HYPERBOLIC, x, [1.0, 0, 0]), [0, 1, 0])


@pytest.mark.parametrize("kind", KINDS)
@given(s=st.floats(-4, 4, allow_nan=False))
def test_exp_map_stays_on_surface_at_unit_speed(kind, s):
    x, v = random_states(kind, 1, 7)
    y = exp_map(kind, x[0], v[0], s)
    assert abs(lam(kind, y) - 1) < 1e-9 * max(1.0, np.abs(y).max() ** 2)
    w = geodesic_velocity(kind, x[0], v[0], s)
    assert abs(metric_inner(kind, w, w) - 1) < 1e-9 * max(1.0, np.abs(w).max() ** 2)
    assert geodesic_distance(kind, x[0], y) == pytest.approx(abs(s) if kind is Surface.HYPERBOLIC
                                                            else np.arccos(np.cos(s)), abs=1e-6)


@pytest.mark.parametrize("kind", KINDS)
def test_geodesic_velocity_is_derivative(kind):
    x, v = random_states(kind, 1, 3)
    h = 1e-6
    fd = (exp_map(kind, x[0], v[0], 0.7 + h) - exp_map(kind, x[0], v[0], 0.7 - h)) / (2 * h)
    assert np.allclose(fd, geodesic_velocity(kind, x[0], v[0], 0.7), atol=1e-8)


def test_sphere_distance_examples():
    k = Surface.SPHERE
    assert geodesic_distance(k, [0, 0, 1], [1, 0, 0]) == pytest.approx(np.pi / 2)
    # clamped: rounding slightly outside [-1, 1] must not give NaN
    assert geodesic_distance(k, [0, 0, 1], [0, 0, 1 + 1e-16]) == 0.0


def test_hyperbolic_distance_example():
    k = Surface.HYPERBOLIC
    y = np.array([np.sinh(1.3), 0, np.cosh(1.3)])
    assert geodesic_distance(k, [0, 0, 1], y) == pytest.approx(1.3, abs=1e-12)


@pytest.mark.parametrize("kind", KINDS)
@given(phi=st.floats(-7, 7, allow_nan=False))
def test_rotation_is_isometry_fixing_center(kind, phi):
    x, v = random_states(kind, 2, 11)
    c = x[0]
    y = x[1]
    ry = rotate_about(kind, c, phi, y)
    assert np.allclose(rotate_about(kind, c, phi, c), c, atol=1e-12)
    assert geodesic_distance(kind, c, ry) == pytest.approx(geodesic_distance(kind, c, y), abs=1e-8)
    assert lam(kind, ry) == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("kind", KINDS)
def test_geodesic_circle_has_unit_ccw_tangent(kind):
    c = normalize_point(kind, np.array([0.2, -0.3, 1.0]))
    tau = np.linspace(0, 2 * np.pi, 9)
    pts, du = geodesic_circle(kind, c, 0.6, tau)
    assert np.allclose(geodesic_distance(kind, pts, c), 0.6, atol=1e-12)
    assert np.allclose(metric_inner(kind, du, du), 1, atol=1e-12)
    # the center is to the left: J u points toward it
    inward = j_rotate(kind, pts, du)
    toward = c - kind.C(0.6) * pts
    assert np.all(metric_inner(kind, inward, toward) > 0)


@pytest.mark.parametrize("kind", KINDS)
def test_tangent_frame_orthonormal(kind):
    for x in (np.array([0, 0, 1.0]), normalize_point(kind, np.array([0.9, 0.1, 1.5]))):
        e, f = tangent_frame(kind, x)
        G = np.array([[metric_inner(kind, a, b) for b in (e, f)] for a in (e, f)])
        assert np.allclose(G, np.eye(2), atol=1e-12)


def test_arc_cot():
    assert arc_cot(Surface.SPHERE, 2.0) == pytest.approx(0.4636476090008061)
    assert arc_cot(Surface.SPHERE, 0.0) == pytest.approx(np.pi / 2)
    assert arc_cot(Surface.HYPERBOLIC, 3.0) == pytest.approx(0.34657359027997264)
    assert np.isinf(arc_cot(Surface.HYPERBOLIC, 0.5))


def test_validation_errors():
    with pytest.raises(ValueError):
        check_surface_point(Surface.SPHERE, [1.0, 1.0, 0.0])
    with pytest.raises(ValueError):
        check_surface_point(Surface.HYPERBOLIC, [0.0, 0.0, -1.0])
    with pytest.raises(ValueError):
        check_unit_tangent(Surface.SPHERE, [0, 0, 1.0], [0, 0, 1.0])
    with pytest.raises(ValueError):
        normalize_point(Surface.HYPERBOLIC, [2.0, 0.0, 1.0])
    with pytest.raises(ValueError):
        Surface.parse("torus")


def test_normalize_tangent_projects():
    x = np.array([0.0, 0.0, 1.0])
    v = normalize_tangent(Surface.SPHERE, x, [3.0, 0.0, 5.0])
    assert np.allclose(v, [1, 0, 0])
