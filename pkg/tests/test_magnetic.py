import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from magbilliard.geometry import Surface, geodesic_distance, j_rotate, metric_inner
from magbilliard.magnetic import MagneticParams, larmor_center, larmor_circle_point, magnetic_flow

from .conftest import KINDS, random_states


def test_params_round_trip():
    m = MagneticParams.from_beta("sphere", 1.0)
    assert m.r == pytest.approx(np.pi / 4)
    h = MagneticParams.from_radius("hyperbolic", 0.5)
    assert h.beta == pytest.approx(1 / np.tanh(0.5))
    assert h.d == pytest.approx(np.tanh(0.5))


def test_params_reject_bad_values():
    with pytest.raises(ValueError):
        MagneticParams.from_beta("hyperbolic", 0.9)
    with pytest.raises(ValueError):
        MagneticParams.from_beta("sphere", -1.0)
    with pytest.raises(ValueError):
        MagneticParams(Surface.SPHERE, 1.0, 0.5)


def test_center_examples():
    x = np.array([0.0, 0.0, 1.0])
    v = np.array([1.0, 0.0, 0.0])
    c = larmor_center(x, v, MagneticParams.from_beta("sphere", 1.0))
    assert np.allclose(c, [0, np.sqrt(0.5), np.sqrt(0.5)], atol=1e-15)
    c = larmor_center(x, v, MagneticParams.from_beta("hyperbolic", 2.0))
    assert np.allclose(c, [0, 1 / np.sqrt(3), 2 / np.sqrt(3)], atol=1e-15)


@pytest.mark.parametrize("kind", KINDS)
def test_center_at_distance_r(kind):
    m = MagneticParams.from_radius(kind, 0.7)
    x, v = random_states(kind, 20, 2)
    c = larmor_center(x, v, m)
    assert np.allclose(geodesic_distance(kind, c, x), 0.7, atol=1e-10)


@pytest.mark.parametrize("kind", KINDS)
@given(s=st.floats(-10, 10, allow_nan=False))
def test_flow_keeps_center(kind, s):
    m = MagneticParams.from_radius(kind, 0.6)
    x, v = random_states(kind, 1, 4)
    y, w = magnetic_flow(x[0], v[0], m, s)
    assert np.allclose(larmor_center(y, w, m), larmor_center(x[0], v[0], m), atol=1e-9)
    assert metric_inner(kind, w, w) == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("kind", KINDS)
def test_flow_has_unit_speed_and_period(kind):
    m = MagneticParams.from_radius(kind, 0.5)
    x, v = random_states(kind, 1, 5)
    h = 1e-6
    fd = (magnetic_flow(x[0], v[0], m, h).x - magnetic_flow(x[0], v[0], m, -h).x) / (2 * h)
    assert np.allclose(fd, v[0], atol=1e-8)
    y, w = magnetic_flow(x[0], v[0], m, m.period)
    assert np.allclose(y, x[0], atol=1e-12) and np.allclose(w, v[0], atol=1e-12)


@pytest.mark.parametrize("kind", KINDS)
def test_circle_point_inverts_center(kind):
    m = MagneticParams.from_radius(kind, 0.9)
    c = np.array([0.0, 0.0, 1.0])
    st_ = larmor_circle_point(c, m, np.linspace(0, 6, 5))
    assert np.allclose(larmor_center(st_.x, st_.v, m), c, atol=1e-12)


@pytest.mark.parametrize("kind", KINDS)
def test_flow_turns_left(kind):
    m = MagneticParams.from_radius(kind, 0.5)
    x, v = random_states(kind, 1, 9)
    y, _ = magnetic_flow(x[0], v[0], m, 1e-3)
    assert metric_inner(kind, y - x[0], j_rotate(kind, x[0], v[0])) > 0
