import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from magbilliard.algebraic import (
    HomogeneousSurfaceFn,
    TrivariatePoly,
    find_singular_points,
    homogenize,
    implicit_geodesic_curvature,
    poly_from_json,
    poly_to_json,
    remarkable_quantity,
    restricted_gradient_norm,
    round_case_polynomial,
    trace_level_curve,
)
from magbilliard.billiard import GeodesicCircleBoundary
from magbilliard.exceptions import DegreeTooLow, MaxPointsExceeded, SingularPoint
from magbilliard.fronts import parallel_point
from magbilliard.geometry import Surface
from magbilliard.harmonics import random_polynomial
from magbilliard.magnetic import MagneticParams

from .conftest import KINDS, random_states

X1, X2, X3 = TrivariatePoly.variables()
SPH, HYP = Surface.SPHERE, Surface.HYPERBOLIC


def circle_quadric(kind, rho):
    """Zero set on the surface is the circle of radius ``rho`` about the pole."""
    c = float(kind.C(rho))
    L = TrivariatePoly.lam(kind)
    F = X3**2 - c * c * L if kind is SPH else c * c * L - X3**2
    return HomogeneousSurfaceFn(F, TrivariatePoly(), 2, kind)


# -- polynomials ------------------------------------------------------------


def test_poly_arithmetic_and_invariants():
    P = (X1 + 2 * X2) * (X1 - X3) - X1 * X1
    assert P.terms == {(1, 0, 1): -1.0, (1, 1, 0): 2.0, (0, 1, 1): -2.0}
    assert P.degree == 2
    assert (P - P).is_zero() and (P - P).terms == {}
    assert (X1 + X2) ** 3 == X1**3 + 3 * X1**2 * X2 + 3 * X1 * X2**2 + X2**3
    assert (X1**3 * X2).diff(0) == 3 * X1**2 * X2


@given(seed=st.integers(0, 2**32 - 1))
def test_poly_json_round_trip(seed):
    P = random_polynomial(5, rng=seed)
    Q, kind = poly_from_json(poly_to_json(P, kind="hyperbolic"))
    assert Q == P and kind is HYP
    doc = json.loads(poly_to_json(P, kind="sphere"))
    assert doc["N"] == P.degree and doc["kind"] == "sphere"
    assert all(set(t) == {"e", "c"} for t in doc["terms"])


def test_gradient_and_hessian_match_fd():
    P = random_polynomial(6, rng=1)
    rng = np.random.default_rng(2)
    h = 1e-5
    for x in rng.uniform(-1, 1, size=(20, 3)):
        g = P.gradient(x)
        H = P.hessian(x)
        E = np.eye(3) * h
        g_fd = np.array([(P(x + e) - P(x - e)) / (2 * h) for e in E])
        H_fd = np.array([(P.gradient(x + e) - P.gradient(x - e)) / (2 * h) for e in E])
        assert np.allclose(g, g_fd, rtol=1e-6, atol=1e-6 * np.abs(g).max())
        assert np.allclose(H, H_fd, rtol=1e-6, atol=1e-6 * np.abs(H).max())


# -- homogenization -----------------------------------------------------------


def test_homogenize_examples():
    with pytest.raises(DegreeTooLow):
        homogenize(X3 - 0.5, SPH)
    c = 0.6
    Ft = homogenize(X3**2 - c * c, SPH)
    assert Ft.p == X3**2 - c * c * TrivariatePoly.lam(SPH) and Ft.q.is_zero()
    Ft = homogenize(X1 * X2 * X3 + X3**2, SPH)
    assert Ft.N == 3 and Ft.p == X1 * X2 * X3 and Ft.q == X3**2


@pytest.mark.parametrize("kind", KINDS)
def test_homogenized_agrees_on_surface(kind):
    P = random_polynomial(5, rng=7)
    Ft = homogenize(P, kind)
    x, _ = random_states(kind, 100, 3)
    assert np.allclose(Ft(x), P(x), atol=1e-12 * P.max_abs_coefficient())


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("lam", [0.5, 2.0])
def test_homogeneity(kind, lam):
    Ft = homogenize(random_polynomial(5, rng=11), kind)
    x, _ = random_states(kind, 100, 4)
    assert np.allclose(Ft(lam * x), lam**Ft.N * Ft(x), rtol=1e-9, atol=1e-12)


@pytest.mark.parametrize("kind", KINDS)
def test_euler_identities(kind):
    Ft = homogenize(random_polynomial(6, rng=5), kind)
    x, _ = random_states(kind, 100, 8)
    F, g, H = Ft.eval_grad_hess(x)
    scale = np.abs(g).max(axis=1, keepdims=True)
    assert np.allclose(np.einsum("nij,nj->ni", H, x) / scale, (Ft.N - 1) * g / scale, atol=1e-9)
    assert np.allclose(np.sum(g * x, axis=1), Ft.N * F, rtol=1e-9, atol=1e-9 * scale[:, 0])


@pytest.mark.parametrize("kind", KINDS)
def test_eval_grad_hess_vs_fd(kind):
    Ft = homogenize(random_polynomial(5, rng=13), kind)
    x, _ = random_states(kind, 100, 9)
    _, g, H = Ft.eval_grad_hess(x)
    h = 1e-5
    for i, e in enumerate(np.eye(3) * h):
        gp = Ft.eval_grad_hess(x + e)[1]
        gm = Ft.eval_grad_hess(x - e)[1]
        g_fd = (Ft(x + e) - Ft(x - e)) / (2 * h)
        scale = np.abs(g).max()
        assert np.max(np.abs(g_fd - g[:, i])) < 1e-6 * scale
        assert np.max(np.abs((gp - gm) / (2 * h) - H[:, :, i])) < 1e-6 * np.abs(H).max()


def test_hand_gradient_and_hessian():
    rho = 0.7
    c, s = np.cos(rho), np.sin(rho)
    Ft = circle_quadric(SPH, rho)
    F, g, H = Ft.eval_grad_hess(np.array([s, 0.0, c]))
    assert F == pytest.approx(0.0, abs=1e-15)
    assert np.allclose(g, [-2 * c * c * s, 0, 2 * s * s * c], atol=1e-15)
    assert np.allclose(H, np.diag([-2 * c * c, -2 * c * c, 2 * s * s]), atol=1e-15)


def test_evaluation_beyond_absolute_rejected():
    Ft = homogenize(X1**2 + X3**2 + X3 * X1 * X2 + X1, HYP)
    with pytest.raises(ValueError):
        Ft(np.array([1.0, 0.0, 0.5]))


# -- curvature and the remarkable quantity --------------------------------------


@pytest.mark.parametrize("rho", [0.3, np.pi / 4, 1.2])
def test_implicit_curvature_sphere_circle(rho):
    Ft = circle_quadric(SPH, rho)
    pts, _ = GeodesicCircleBoundary(SPH, rho).evaluate(np.linspace(0, 5, 9))
    assert np.allclose(implicit_geodesic_curvature(Ft, pts), 1 / np.tan(rho), atol=1e-12)


@pytest.mark.parametrize("rho", [0.3, 1.0, 2.0])
def test_implicit_curvature_hyperbolic_circle(rho):
    Ft = circle_quadric(HYP, rho)
    pts, _ = GeodesicCircleBoundary(HYP, rho).evaluate(np.linspace(0, 5, 9))
    assert np.allclose(implicit_geodesic_curvature(Ft, pts), 1 / np.tanh(rho), atol=1e-10)


def test_implicit_curvature_flips_with_sign():
    Ft = circle_quadric(SPH, 0.5)
    x = np.array([np.sin(0.5), 0, np.cos(0.5)])
    assert implicit_geodesic_curvature(Ft.scaled(-1.0), x) == pytest.approx(-1 / np.tan(0.5), abs=1e-12)


def test_singular_gradient_raises():
    Ft = homogenize(X1**2 + X2**2, SPH)  # double zero at the pole
    with pytest.raises(SingularPoint):
        implicit_geodesic_curvature(Ft, np.array([0.0, 0.0, 1.0]))


@pytest.mark.parametrize("kind,rho,r", [(SPH, 0.5, 0.8), (SPH, 1.0, 0.3), (HYP, 1.0, 1.2), (HYP, 0.6, 2.0)])
def test_remarkable_quantity_constant_on_round_fronts(kind, rho, r):
    m = MagneticParams.from_radius(kind, r)
    Ft = homogenize(round_case_polynomial(kind, rho, r), kind).normalized()
    b = GeodesicCircleBoundary(kind, rho)
    s = b.grid(256)
    for side in (1, -1):
        pts = parallel_point(b, s, side * r)
        q = remarkable_quantity(Ft, pts, m, side)
        assert np.std(q) < 1e-9 * np.abs(np.mean(q))
        assert abs(np.mean(q)) > 1e-6
        k = implicit_geodesic_curvature(Ft, pts)
        nrm = Ft.gradient_norm(pts)
        assert np.allclose(q / nrm**3, k - side * m.beta, atol=1e-9)


# -- tracing ------------------------------------------------------------------


@pytest.mark.parametrize("kind", KINDS)
def test_trace_circle(kind):
    rho, step = 0.8, 1e-2
    Ft = circle_quadric(kind, rho)
    seed = np.array([kind.S(rho), 0.0, kind.C(rho)])
    pts = trace_level_curve(Ft, seed, step=step)
    assert abs(len(pts) - kind.circumference(rho) / step) <= 2
    assert np.max(np.abs(Ft(pts))) < 1e-10
    assert np.max(np.abs(np.sum(kind.lambda_diag * pts * pts, axis=1) - 1)) < 1e-12


def test_trace_corrects_offset_seed():
    rho = 0.8
    Ft = circle_quadric(SPH, rho)
    seed = np.array([np.sin(rho + 1e-7), 0.0, np.cos(rho + 1e-7)])
    pts = trace_level_curve(Ft, seed, step=5e-2)
    assert abs(Ft(pts[0])) < 1e-12


def test_trace_limits():
    Ft = circle_quadric(SPH, 0.8)
    seed = np.array([np.sin(0.8), 0.0, np.cos(0.8)])
    with pytest.raises(MaxPointsExceeded):
        trace_level_curve(Ft, seed, step=1e-2, max_points=50)
    # the great circles x1 = 0 and x2 = 0 cross at the pole
    Fx = homogenize(X1 * X2 + 0.0 * X3**2, SPH)
    with pytest.raises(SingularPoint):
        trace_level_curve(Fx, np.array([0.0, 0.3, np.sqrt(1 - 0.09)]), step=1e-2)


# -- singular points -------------------------------------------------------------


def test_circle_has_no_singular_points():
    Ft = circle_quadric(SPH, 0.8)
    rng = np.random.default_rng(0)
    res = find_singular_points(Ft, rng.normal(size=(100, 3)))
    assert len(res) == 0 and res.dropped == 100


def test_crossing_is_found():
    # two great circles x1 = 0 and x2 = 0 cross at the poles
    Ft = homogenize(X1 * X2 + 0.0 * X3**2, SPH)
    rng = np.random.default_rng(1)
    res = find_singular_points(Ft, rng.normal(size=(60, 3)))
    assert len(res) >= 1
    for p, r in res:
        assert r < 1e-10
        assert abs(abs(p[2]) - 1) < 1e-8
        assert restricted_gradient_norm(Ft, p) < 1e-8
