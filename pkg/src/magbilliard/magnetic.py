"""Larmor circles and the constant magnetic flow."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import Surface, UnitTangent, geodesic_circle, j_rotate, rotate_about


@dataclass(frozen=True)
class MagneticParams:
    """Field magnitude ``beta`` and Larmor radius ``r``, tied by ``beta = cot r`` or ``coth r``.

    Build with :meth:`from_beta` or :meth:`from_radius`; direct construction
    checks that the pair is consistent.
    """

    kind: Surface
    beta: float
    r: float

    def __post_init__(self):
        kind = Surface.parse(self.kind)
        object.__setattr__(self, "kind", kind)
        if not (self.beta > 0 and self.r > 0):
            raise ValueError("beta and r must be positive")
        if kind is Surface.SPHERE:
            if not self.r < np.pi / 2:
                raise ValueError("spherical Larmor radius must be below pi/2")
            expected = 1.0 / np.tan(self.r)
        else:
            if not self.beta > 1.0:
                raise ValueError("hyperbolic Larmor circles need beta > 1")
            expected = 1.0 / np.tanh(self.r)
        if not np.isclose(expected, self.beta, rtol=1e-12, atol=0):
            raise ValueError(f"inconsistent pair beta={self.beta}, r={self.r}")

    @classmethod
    def from_beta(cls, kind, beta):
        kind = Surface.parse(kind)
        beta = float(beta)
        if beta <= 0:
            raise ValueError("beta must be positive")
        if kind is Surface.SPHERE:
            r = float(np.arctan2(1.0, beta))
        else:
            if beta <= 1.0:
                raise ValueError("hyperbolic Larmor circles need beta > 1")
            r = float(np.arctanh(1.0 / beta))
        return cls(kind, beta, r)

    @classmethod
    def from_radius(cls, kind, r):
        kind = Surface.parse(kind)
        r = float(r)
        if r <= 0:
            raise ValueError("r must be positive")
        beta = 1.0 / np.tan(r) if kind is Surface.SPHERE else 1.0 / np.tanh(r)
        return cls(kind, float(beta), r)

    @property
    def d(self):
        """``tan r`` (``tanh r`` on the hyperboloid)."""
        return float(np.tan(self.r) if self.kind is Surface.SPHERE else np.tanh(self.r))

    @property
    def period(self):
        """Arc length of one full Larmor circle."""
        return float(self.kind.circumference(self.r))

    @property
    def angular_rate(self):
        """Rotation angle about the center per unit arc length."""
        return 1.0 / float(self.kind.S(self.r))


def larmor_center(x, v, m):
    """Center of the Larmor circle through ``x`` with velocity ``v``."""
    kind = m.kind
    return kind.C(m.r) * np.asarray(x, dtype=float) + kind.S(m.r) * j_rotate(kind, x, v)


def larmor_circle_point(center, m, tau):
    """State at angle ``tau`` on the Larmor circle about ``center``.

    The returned velocity keeps the disc on its left, so that
    ``larmor_center`` of the result gives ``center`` back.
    """
    x, v = geodesic_circle(m.kind, center, m.r, tau)
    return UnitTangent(x, v)


def magnetic_flow(x, v, m, s):
    """Transport ``(x, v)`` by arc length ``s`` along its Larmor circle.

    Closed-form: a rotation about the Larmor center by ``s / sin r``
    (``s / sinh r``). ``s`` may be an array of lengths.
    """
    c = larmor_center(x, v, m)
    phi = np.asarray(s, dtype=float) * m.angular_rate
    return UnitTangent(rotate_about(m.kind, c, phi, x), rotate_about(m.kind, c, phi, v))
