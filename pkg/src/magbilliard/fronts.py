"""Parallel curves of the boundary, their singularities and curvatures.

The front at signed offset ``t`` is ``exp(t J gamma'(s))``. Its s-derivative in
R^3 is ``Y(s, t) gamma'(s)`` with the Jacobi value ``Y = C(t) - k(s) S(t)``, so
cusps sit exactly where ``Y`` vanishes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .billiard import curvature_extrema
from .exceptions import DegenerateBand, PoleAtEqualCurvature
from .geometry import Surface, arc_cot, exp_map, j_rotate, metric_inner, metric_norm

SINGULAR_TOL = 1e-8


def parallel_point(b, s, t):
    """Point of the front at offset ``t``; positive ``t`` moves into the domain."""
    x, tan = b.evaluate(np.asarray(s, dtype=float))
    return exp_map(b.kind, x, j_rotate(b.kind, x, tan), t)


def jacobi_Y(b, s, t, kind=None):
    """``cos t - k(s) sin t`` on the sphere, ``cosh t - k(s) sinh t`` on the hyperboloid."""
    kind = b.kind if kind is None else Surface.parse(kind)
    return _jacobi(kind, b.curvature(np.asarray(s, dtype=float)), t)


def _jacobi(kind, k, t):
    return kind.C(t) - np.asarray(k, dtype=float) * kind.S(t)


def singular_band(b, kind=None, n=2048):
    """``(rho_min, rho_max)``: offsets between the extreme curvature radii."""
    kind = b.kind if kind is None else Surface.parse(kind)
    k_min, _, k_max, _ = curvature_extrema(b, n)
    if k_max - k_min <= 1e-10 * max(1.0, abs(k_max)):
        raise DegenerateBand(float(arc_cot(kind, 0.5 * (k_min + k_max))))
    return float(arc_cot(kind, k_max)), float(arc_cot(kind, k_min))


def _check_offset(kind, t):
    # beyond a quarter great circle the spherical front passes the antipodal focus
    if kind is Surface.SPHERE and abs(t) >= np.pi / 2:
        raise ValueError(f"spherical front offset must satisfy |t| < pi/2, got {t}")


def has_singularity(b, t, n=2048):
    """Whether the front at offset ``t`` has a cusp, seen as a sign change of ``Y``.

    ``Y`` is affine in ``k``, so its extremes sit at the curvature extrema;
    those are sampled along with the grid to catch cusps born between nodes.
    """
    _check_offset(b.kind, t)
    _, s_min, _, s_max = curvature_extrema(b, n)
    Y = jacobi_Y(b, np.concatenate([b.grid(n), [s_min, s_max]]), t)
    return bool(np.any(np.sign(Y) != np.sign(Y[0])))


def offset_curvature(kind, k, t):
    """Curvature of the front at offset ``t``, oriented along the boundary parameter.

    This is ``(k C(t) + K S(t)) / |Y|`` with ``K`` the Gaussian curvature; at
    ``t = +-r`` it reduces to :func:`front_curvature` on the smooth side.
    """
    kind = Surface.parse(kind)
    k = np.asarray(k, dtype=float)
    Y = _jacobi(kind, k, t)
    return (k * kind.C(t) + kind.value * kind.S(t)) / np.abs(Y)


def front_curvature(k, m, side):
    """Closed-form curvature of the front at offset ``side * r``."""
    side = _side(side)
    k = np.asarray(k, dtype=float)
    beta = m.beta
    sph = m.kind is Surface.SPHERE
    if side > 0:
        den = k - beta
        if np.any(np.abs(den) < 1e-14 * max(1.0, beta)):
            raise PoleAtEqualCurvature("front curvature blows up where k = beta")
        num = k * beta + 1.0 if sph else k * beta - 1.0
    else:
        den = k + beta
        num = k * beta - 1.0 if sph else k * beta + 1.0
    out = num / den
    return float(out) if out.ndim == 0 else out


def _side(side):
    if side in (1, "+", "plus", +1.0):
        return 1
    if side in (-1, "-", "minus", -1.0):
        return -1
    raise ValueError(f"side must be + or -, got {side!r}")


def numeric_front_curvature(b, s, t, h=1e-3):
    """Frenet curvature of the traced front by fourth-order differences in ``s``."""
    s = np.asarray(s, dtype=float)
    kind = b.kind
    p = [parallel_point(b, s + o * h, t) for o in (-2, -1, 0, 1, 2)]
    d1 = (p[0] - 8 * p[1] + 8 * p[3] - p[4]) / (12 * h)
    d2 = (-p[0] + 16 * p[1] - 30 * p[2] + 16 * p[3] - p[4]) / (12 * h * h)
    speed = metric_norm(kind, d1)
    return metric_inner(kind, d2, j_rotate(kind, p[2], d1)) / speed**3


@dataclass
class BetaInequalityReport:
    """Outcome of the sampled ``k_{+r} > beta`` and ``k_{-r} < beta`` checks."""

    holds: bool
    plus_margin: float  # min k_{+r} - beta
    minus_margin: float  # beta - max k_{-r}
    lower_margin: float | None = None  # min k_{-r} - 1, hyperboloid only

    def __bool__(self):
        return self.holds


def check_beta_inequalities(b, m, n=2048):
    k = b.curvature(b.grid(n))
    kp = front_curvature(k, m, +1)
    km = front_curvature(k, m, -1)
    plus = float(np.min(kp) - m.beta)
    minus = float(m.beta - np.max(km))
    lower = None
    ok = plus > 0 and minus > 0
    if m.kind is Surface.HYPERBOLIC:
        lower = float(np.min(km) - 1.0)
        ok = ok and lower > 0
    return BetaInequalityReport(bool(ok), plus, minus, lower)


@dataclass
class FrontSample:
    """A front sampled on the boundary grid."""

    t: float
    s: np.ndarray
    points: np.ndarray
    curvatures: np.ndarray
    singular: np.ndarray = field(repr=False)

    def __len__(self):
        return len(self.s)

    def rows(self):
        """``(s, t, px, py, pz, curvature, singular)`` tuples, the CSV layout."""
        for s, p, k, z in zip(self.s, self.points, self.curvatures, self.singular):
            yield float(s), self.t, float(p[0]), float(p[1]), float(p[2]), float(k), bool(z)


def trace_front(b, t, n=2048, tol=SINGULAR_TOL):
    """Sample the front at offset ``t`` with analytic curvatures and cusp flags."""
    _check_offset(b.kind, t)
    s = b.grid(n)
    k = b.curvature(s)
    Y = _jacobi(b.kind, k, t)
    sing = np.abs(Y) < tol
    with np.errstate(divide="ignore", invalid="ignore"):
        kf = np.where(sing, np.nan, offset_curvature(b.kind, k, t))
    return FrontSample(float(t), s, parallel_point(b, s, t), kf, sing)


__all__ = [
    "SINGULAR_TOL",
    "parallel_point",
    "jacobi_Y",
    "singular_band",
    "has_singularity",
    "offset_curvature",
    "front_curvature",
    "numeric_front_curvature",
    "BetaInequalityReport",
    "check_beta_inequalities",
    "FrontSample",
    "trace_front",
]
