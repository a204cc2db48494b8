"""Embedded models of the unit sphere and the hyperboloid.

Both surfaces live in R^3. Points are plain ``float`` arrays of shape ``(3,)``
(or stacks ``(..., 3)``); every function broadcasts over leading axes. The
bilinear form is ``<A u, w>`` with ``A = diag(1, 1, 1)`` on the sphere and
``A = diag(1, 1, -1)`` on the hyperboloid; the surface itself is the level set
``Lambda(x) = 1`` where ``Lambda`` is ``x1^2 + x2^2 + x3^2`` or
``-x1^2 - x2^2 + x3^2`` respectively (upper sheet, ``x3 > 0``).
"""

from __future__ import annotations

from enum import Enum
from typing import NamedTuple

import numpy as np

POINT_TOL = 1e-12


class Surface(Enum):
    """Constant-curvature surface, valued by its Gaussian curvature."""

    SPHERE = 1
    HYPERBOLIC = -1

    @classmethod
    def parse(cls, value):
        if isinstance(value, Surface):
            return value
        key = str(value).strip().lower()
        if key in ("sphere", "spherical", "s", "+1", "1"):
            return cls.SPHERE
        if key in ("hyperbolic", "hyperboloid", "h", "-1"):
            return cls.HYPERBOLIC
        raise ValueError(f"unknown surface {value!r}")

    @property
    def label(self):
        return "sphere" if self is Surface.SPHERE else "hyperbolic"

    @property
    def A(self):
        return np.diag([1.0, 1.0, float(self.value)])

    @property
    def metric_diag(self):
        return np.array([1.0, 1.0, float(self.value)])

    @property
    def lambda_diag(self):
        # Lambda(x) = <Q x, x>; grad Lambda = 2 Q x
        return np.array([1.0, 1.0, 1.0]) if self is Surface.SPHERE else np.array([-1.0, -1.0, 1.0])

    @property
    def self_inner(self):
        """``<A x, x>`` for a point on the surface."""
        return float(self.value)

    def C(self, t):
        return np.cos(t) if self is Surface.SPHERE else np.cosh(t)

    def S(self, t):
        return np.sin(t) if self is Surface.SPHERE else np.sinh(t)

    def circumference(self, radius):
        """Length of a geodesic circle of the given radius."""
        return 2.0 * np.pi * self.S(radius)


class UnitTangent(NamedTuple):
    """A base point together with a metric-unit tangent vector."""

    x: np.ndarray
    v: np.ndarray


def metric_inner(kind, u, w):
    """Return ``<A u, w>`` along the last axis."""
    u = np.asarray(u, dtype=float)
    w = np.asarray(w, dtype=float)
    return u[..., 0] * w[..., 0] + u[..., 1] * w[..., 1] + kind.value * u[..., 2] * w[..., 2]


def metric_norm(kind, v):
    return np.sqrt(np.maximum(metric_inner(kind, v, v), 0.0))


def lam(kind, x):
    """The defining quadratic form ``Lambda``; equals 1 on the surface."""
    x = np.asarray(x, dtype=float)
    return kind.self_inner * metric_inner(kind, x, x)


def normalize_point(kind, x):
    """Rescale ``x`` onto ``{Lambda = 1}`` (upper sheet for the hyperboloid)."""
    x = np.asarray(x, dtype=float)
    L = lam(kind, x)
    if np.any(L <= 0):
        raise ValueError("point lies on or beyond the absolute Lambda <= 0")
    y = x / np.sqrt(L)[..., None]
    if kind is Surface.HYPERBOLIC:
        y = np.where(y[..., 2:3] < 0, -y, y)
    return y


def project_tangent(kind, x, v):
    """Remove the component of ``v`` along the surface normal at ``x``."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    alpha = metric_inner(kind, v, x) / kind.self_inner
    return v - alpha[..., None] * x


def normalize_tangent(kind, x, v):
    w = project_tangent(kind, x, v)
    return w / metric_norm(kind, w)[..., None]


def cross(u, w):
    return np.cross(u, w)


def j_rotate(kind, x, v):
    """Rotate a tangent vector by a quarter turn: ``[x, v]`` or ``A [x, v]``."""
    w = np.cross(x, v)
    if kind is Surface.HYPERBOLIC:
        w = w * kind.metric_diag
    return w


def exp_map(kind, x, v, s):
    """Follow the geodesic from ``x`` with unit velocity ``v`` for arc length ``s``."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    s = np.asarray(s, dtype=float)[..., None]
    return kind.C(s) * x + kind.S(s) * v


def geodesic_velocity(kind, x, v, s):
    """Velocity of the geodesic ``exp_map(x, v, s)`` at arc length ``s``."""
    s = np.asarray(s, dtype=float)[..., None]
    return -kind.value * kind.S(s) * x + kind.C(s) * v


def tangent_rotate(kind, x, v, eps):
    """Counterclockwise rotation of the tangent plane at ``x`` by ``eps`` radians."""
    eps = np.asarray(eps, dtype=float)[..., None]
    return np.cos(eps) * v + np.sin(eps) * j_rotate(kind, x, v)


def geodesic_distance(kind, a, b):
    """Geodesic distance with the inverse-function argument clamped to its domain."""
    ip = metric_inner(kind, a, b)
    if kind is Surface.SPHERE:
        return np.arccos(np.clip(ip, -1.0, 1.0))
    return np.arccosh(np.maximum(-ip, 1.0))


def arc_cot(kind, k):
    """Inverse of ``cot`` (sphere, values in ``(0, pi)``) or ``coth`` (hyperboloid)."""
    k = np.asarray(k, dtype=float)
    if kind is Surface.SPHERE:
        return np.arctan2(1.0, k)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(k > 1.0, np.arctanh(1.0 / np.where(k == 0, np.inf, k)), np.inf)


def cot_like(kind, t):
    """``cot t`` on the sphere, ``coth t`` on the hyperboloid."""
    return kind.C(t) / kind.S(t)


def tangent_frame(kind, x):
    """Deterministic metric-orthonormal frame ``(e, Je)`` of the tangent plane at ``x``.

    ``e`` is the Gram-Schmidt projection of the first coordinate axis, falling
    back to the second axis when the first is nearly normal to the surface.
    """
    x = np.asarray(x, dtype=float)
    e = project_tangent(kind, x, np.array([1.0, 0.0, 0.0]))
    if metric_norm(kind, e) < 0.1:
        e = project_tangent(kind, x, np.array([0.0, 1.0, 0.0]))
    e = e / metric_norm(kind, e)
    return e, j_rotate(kind, x, e)


def rotate_about(kind, c, phi, y):
    """Apply the isometry rotating the surface about ``c`` by angle ``phi``.

    The map is linear in ``y``, so it moves points and tangent vectors alike.
    ``phi`` may be an array of angles for one ``(c, y)``, or ``c`` and ``y``
    may be stacked along a leading axis.
    """
    c = np.asarray(c, dtype=float)
    y = np.asarray(y, dtype=float)
    alpha = np.asarray(metric_inner(kind, y, c) / kind.self_inner)[..., None]
    perp = y - alpha * c
    jperp = j_rotate(kind, c, perp)
    phi = np.asarray(phi, dtype=float)[..., None]
    return alpha * c + np.cos(phi) * perp + np.sin(phi) * jperp


def geodesic_circle(kind, center, radius, tau):
    """Points and unit tangents of the geodesic circle about ``center``.

    Parametrized by the angle ``tau`` measured from the reference direction of
    :func:`tangent_frame`; the tangents run counterclockwise, so the disc lies
    to the left.
    """
    e, f = tangent_frame(kind, center)
    tau = np.asarray(tau, dtype=float)[..., None]
    u = np.cos(tau) * e + np.sin(tau) * f
    du = -np.sin(tau) * e + np.cos(tau) * f
    pts = kind.C(radius) * np.asarray(center, dtype=float) + kind.S(radius) * u
    return pts, du


def orthogonal_frame_coords(kind, x, vec, frame=None):
    """Coordinates of ambient vectors ``vec`` in the tangent frame at ``x``."""
    e, f = tangent_frame(kind, x) if frame is None else frame
    return np.stack([metric_inner(kind, vec, e), metric_inner(kind, vec, f)], axis=-1)


def check_surface_point(kind, x, tol=1e-9):
    """Validate a point on the surface; raises ``ValueError`` on failure."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != 3:
        raise ValueError(f"expected trailing dimension 3, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("point has non-finite entries")
    err = np.max(np.abs(lam(kind, x) - 1.0))
    if err > tol:
        raise ValueError(f"point is off the surface: |Lambda - 1| = {err:.3g}")
    if kind is Surface.HYPERBOLIC and np.any(x[..., 2] < 1.0 - tol):
        raise ValueError("hyperbolic points must lie on the upper sheet")
    return x


def check_unit_tangent(kind, x, v, tol=1e-9):
    x = check_surface_point(kind, x, tol)
    v = np.asarray(v, dtype=float)
    if abs(float(np.max(np.abs(metric_inner(kind, v, x))))) > tol:
        raise ValueError("vector is not tangent at its base point")
    if float(np.max(np.abs(metric_inner(kind, v, v) - 1.0))) > tol:
        raise ValueError("tangent vector is not metric-unit")
    return x, v
