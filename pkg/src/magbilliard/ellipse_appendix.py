"""The spherical ellipse and the explicit octic of its parallel curves.

The two octics below are literal transcriptions. They depend only on
``x1, x2`` and the parameters, so they are read as polynomials on the sphere
modulo ``Lambda - 1``. Both helpers accept numbers, numpy arrays or
:class:`TrivariatePoly` variables for ``x1, x2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebraic import (
    TrivariatePoly,
    find_singular_points,
    homogenize,
    restricted_gradient_norm,
)
from .billiard import ParametricBoundary
from .fronts import parallel_point, singular_band
from .geometry import Surface


class SphericalEllipse(ParametricBoundary):
    """Sphere cut by the cone ``x1^2/a^2 + x2^2/b^2 = x3^2``, upper nappe."""

    def __init__(self, a, b, n_table=2048):
        a, b = float(a), float(b)
        if not (0 < b <= a):
            raise ValueError("need 0 < b <= a")
        self.a, self.b = a, b

        def lift(t):
            c, s = np.cos(t), np.sin(t)
            z = np.zeros_like(t)
            P = np.stack([a * c, b * s, np.ones_like(t)], axis=-1)
            dP = np.stack([-a * s, b * c, z], axis=-1)
            ddP = np.stack([-a * c, -b * s, z], axis=-1)
            return P, dP, ddP

        super().__init__(Surface.SPHERE, lift, n_table=n_table, implicit=self.cone_residual)

    def __repr__(self):
        return f"SphericalEllipse(a={self.a!r}, b={self.b!r})"

    def cone_residual(self, x):
        """``sign(x3) x3^2 - x1^2/a^2 - x2^2/b^2``, positive inside."""
        x = np.asarray(x, dtype=float)
        return np.sign(x[..., 2]) * x[..., 2] ** 2 - x[..., 0] ** 2 / self.a**2 - x[..., 1] ** 2 / self.b**2


def ellipse_boundary(a, b, n_table=2048):
    return SphericalEllipse(a, b, n_table=n_table)


# ---------------------------------------------------------------------------
# transcribed octics
# ---------------------------------------------------------------------------


def octic_a2b1_expr(x1, x2, d):
    """The printed octic for ``a = 2, b = 1`` in the variable ``d = tan r``."""
    D = d * d
    return (
        ((D - 4) ** 2 - 10 * (4 + 5 * D + D**2) * x1**2 + 25 * (1 + D) ** 2 * x1**4) * (5 * x1**2 + D * (3 + 5 * x1**2) - 3) ** 2
        + 4 * (1 + D) * (5 * (1 + D) * (124 + 70 * D + 31 * D**2) * x1**2 - 3 * (32 + 60 * D - 45 * D**2 + 7 * D**3)
                         - 375 * (1 + D) ** 2 * (3 + D) * x1**4 + 625 * (1 + D) ** 3 * x1**6) * x2**2
        + 4 * (1 + D) ** 2 * (73 * D**2 - 248 * D - 32 - 150 * (4 + 7 * D + 3 * D**2) * x1**2 + 825 * (1 + D) ** 2 * x1**4) * x2**4
        + 64 * (1 + D) ** 3 * (8 - 7 * D + 25 * (1 + D) * x1**2) * x2**6
        + 256 * (1 + D) ** 4 * x2**8
    )


def octic_general_expr(x1, x2, a, b, d):
    """The printed general-(a, b) octic; ``e = 1 + d^2`` and ``f = 1 + a^2`` abbreviate recurring factors."""
    A2 = a * a
    D = d * d
    e = 1 + D
    f = 1 + A2
    X = x2**2 + D * (x2**2 - 1)
    return (
        a**4 * X**2 * (f**2 * e**2 * x1**4 + 2 * f * e * x1**2 * (x2**2 - A2 + D * (x2**2 - 1)) + (A2 + x2**2 + D * (x2**2 - 1)) ** 2)
        + 2 * A2 * b**2 * (
            a**6 * (e**2 * x2**4 - D - e**2 * x2**2)
            - f**2 * e**2 * x1**4 * (3 * D * (A2 + D) + e * (A2 * (3 + D) - D) * x2**2 - (2 + A2) * e**2 * x2**4)
            + a**4 * (D**2 + D * (2 + 5 * D + 3 * D**2) * x2**2 - 3 * e**2 * (1 + 2 * D) * x2**4 + 3 * e**3 * x2**6)
            + f * e * x1**2 * (3 * a**4 * D + 2 * A2 * D**2 + 3 * D**3
                               + e * (3 * A2 * D * (D - 1) - 5 * D**2 + a**4 * (3 + 2 * D)) * x2**2
                               - e**2 * (2 * a**4 - D + A2 * (6 * D - 1)) * x2**4 + (1 + 3 * A2) * e**3 * x2**6)
            + A2 * (D - 2 * e**2 * x2**2 + 2 * e**2 * x2**4) * X**2
            + D * X**3
            + f**3 * e**3 * x1**6 * (x2**2 + D * (1 + x2**2))
        )
        + b**8 * (e * x2**2 - 1) ** 2 * (f**2 * e**2 * x1**4 + 2 * f * e * x1**2 * (A2 * (e * x2**2 - 1) - D) + (D + A2 * (e * x2**2 - 1)) ** 2)
        + b**4 * (
            f**4 * e**4 * x1**8 + a**8 * (e * x2**2 - 1) ** 2 + 2 * f**3 * e**3 * x1**6 * (f * e * x2**2 - 2 * (A2 + D))
            + f**2 * e**2 * x1**4 * (6 * a**4 + 10 * A2 * D + 6 * D**2 + 2 * e * (A2 * e - 3 * a**4 - 3 * D) * x2**2 + (1 + 8 * A2 + a**4) * e**2 * x2**4)
            + 2 * a**6 * (D + (3 + 5 * D + 2 * D**2) * x2**2 - 3 * e**2 * (2 + D) * x2**4 + 3 * e**3 * x2**6)
            + 2 * A2 * D * (D**2 + D * (2 + 5 * D + 3 * D**2) * x2**2 - 3 * e**2 * (1 + 2 * D) * x2**4 + 3 * e**3 * x2**6)
            + 2 * a**4 * (e**2 * (3 + 10 * D + 3 * D**2) * x2**4 - 3 * D**2 - 4 * (d + d**3) ** 2 * x2**2 - 6 * e**4 * x2**6 + 3 * e**4 * x2**8)
            + D**2 * X**2
            - 2 * f * e * x1**2 * (
                a**6 * (2 - 3 * e * x2**2 + e**2 * x2**4)
                + D * (2 * D**2 - 3 * D * e * x2**2 + e**2 * x2**4)
                + A2 * (4 * D**2 + D * (3 + 8 * D + 5 * D**2) * x2**2 - e**2 * (2 * D - 3) * x2**4 - 3 * e**3 * x2**6)
                + a**4 * (4 * D + (5 + 8 * D + 3 * D**2) * x2**2 + e**2 * (3 * D - 2) * x2**4 - 3 * e**3 * x2**6)
            )
        )
        + 2 * b**6 * (
            a**6 * (e * x1**2 - 1 + e * x2**2) ** 2 * (e * x2**2 - 1 + e * x1**2 * (1 + e * x2**2))
            + (x1**2 + D * (x1**2 - 1)) ** 2 * (e**2 * x2**4 - D - e**2 * x2**2 + e * x1**2 * (1 + e * x2**2))
            + A2 * (3 * e**3 * x1**6 * (1 + e * x2**2)
                    + e**2 * x1**4 * (4 * e**2 * x2**4 - (1 + 7 * D + 6 * D**2) * x2**2 - 3 - 6 * D)
                    + D * (D + (3 + 5 * D + 2 * D**2) * x2**2 - 3 * e**2 * (2 + D) * x2**4 + 3 * e**3 * x2**6)
                    + e * x1**2 * ((3 + 2 * D + 2 * D**2 + 3 * D**3) * x2**2 + D * (2 + 3 * D) - e**2 * (6 + D) * x2**4 + 3 * e**3 * x2**6))
            + a**4 * (3 * e**3 * x1**6 * (1 + e * x2**2)
                      + (e * x2**2 - 1) ** 2 * (D - 2 * e**2 * x2**2 + 2 * e**2 * x2**4)
                      + e**2 * x1**4 * ((1 - 2 * D - 3 * D**2) * x2**2 - 3 * (2 + D) + 5 * e**2 * x2**4)
                      + e * x1**2 * (3 + 2 * D - (2 + 5 * D + 3 * D**2) * x2**2 + (D - 5) * e**2 * x2**4 + 4 * e**3 * x2**6))
        )
    )


def appendix_octic_a2b1(d):
    X1, X2, _ = TrivariatePoly.variables()
    return octic_a2b1_expr(X1, X2, float(d))


def appendix_octic_general(a, b, d):
    if not (0 < b < a) or d <= 0:
        raise ValueError("need 0 < b < a and d > 0")
    X1, X2, _ = TrivariatePoly.variables()
    return octic_general_expr(X1, X2, float(a), float(b), float(d))


def appendix_octic(a, b, d):
    """The a2b1 form when ``(a, b) = (2, 1)``, else the general one."""
    if a == 2 and b == 1:
        return appendix_octic_a2b1(d)
    return appendix_octic_general(a, b, d)


def front_residuals(F, ellipse, d, n=512):
    """Max of sup-norm-normalized ``|F|`` on the fronts at offsets ``+-arctan d``."""
    Fn = F.normalized()
    r = float(np.arctan(d))
    s = ellipse.grid(n)
    return {side: float(np.max(np.abs(Fn(parallel_point(ellipse, s, sgn * r)))))
            for side, sgn in (("+", 1.0), ("-", -1.0))}


# ---------------------------------------------------------------------------
# singular points
# ---------------------------------------------------------------------------


@dataclass
class AppendixPoint:
    """One printed singular point and its spherical lift, with residual diagnostics."""

    printed: np.ndarray
    lifted: np.ndarray
    lam_residual: float
    value: float
    gradient_norm: float
    lifted_value: float
    lifted_gradient_norm: float

    def as_dict(self):
        return {
            "printed": self.printed.tolist(),
            "lifted": self.lifted.tolist(),
            "lambda_residual_printed": self.lam_residual,
            "F_printed": self.value,
            "gradient_norm_printed": self.gradient_norm,
            "F_lifted": self.lifted_value,
            "gradient_norm_lifted": self.lifted_gradient_norm,
        }


@dataclass
class AppendixSingularPoints:
    a: float
    b: float
    d: float
    points: list = field(default_factory=list)
    complex: bool = False

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)


def printed_singular_x1(a, b, d):
    num = (a * a - b * b) * (b * b - d * d)
    return float(np.sqrt(num) / (b * np.sqrt((1 + a * a) * (1 + d * d)))) if num >= 0 else float("nan")


def printed_singular_x3(d):
    return float(np.sqrt((2 + 8 * d * d) / (5 + 5 * d * d)))


def appendix_singular_points(a, b, d):
    """The four printed points ``(+-x1, 0, +-x3)`` with diagnostics.

    ``lifted`` replaces the printed third coordinate by ``sqrt(1 - x1^2)``,
    the point of the sphere above the same ``(x1, 0)``; both agree only for
    ``a = 2, b = 1``. Residuals use the sup-norm normalized octic.
    """
    out = AppendixSingularPoints(float(a), float(b), float(d))
    if b * b < d * d:
        out.complex = True
        return out
    Ft = homogenize(appendix_octic(a, b, d), Surface.SPHERE).normalized()
    x1 = printed_singular_x1(a, b, d)
    x3p = printed_singular_x3(d)
    x3l = float(np.sqrt(max(1.0 - x1 * x1, 0.0)))
    for s1 in (1.0, -1.0):
        for s3 in (1.0, -1.0):
            p = np.array([s1 * x1, 0.0, s3 * x3p])
            q = np.array([s1 * x1, 0.0, s3 * x3l])
            # the octic is x3-free, so F at the printed point equals F at its lift
            out.points.append(AppendixPoint(
                printed=p,
                lifted=q,
                lam_residual=float(abs(p @ p - 1.0)),
                value=float(abs(Ft.p(p))),
                gradient_norm=float(restricted_gradient_norm(Ft, p / np.linalg.norm(p))),
                lifted_value=float(abs(Ft(q))),
                lifted_gradient_norm=float(restricted_gradient_norm(Ft, q)),
            ))
    return out


def random_sphere_seeds(n, rng=None):
    rng = np.random.default_rng(rng)
    v = rng.normal(size=(n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def search_singular_points(a, b, d, n_seeds=200, rng=0):
    Ft = homogenize(appendix_octic(a, b, d), Surface.SPHERE)
    return find_singular_points(Ft, random_sphere_seeds(n_seeds, rng))


@dataclass
class PersistenceRow:
    d: float
    in_band: bool
    n_points: int
    n_clusters: int
    matches_printed: bool


def singular_persistence_scan(a, b, ds, n_seeds=120, rng=0):
    """For each ``d``: whether ``arctan d`` lies in the singular band and how many real singular points Newton finds."""
    band = singular_band(SphericalEllipse(a, b))
    rows = []
    for d in ds:
        res = search_singular_points(a, b, d, n_seeds, rng)
        x1 = printed_singular_x1(a, b, d)
        match = False
        if np.isfinite(x1) and len(res):
            tgt = np.array([x1, 0.0, np.sqrt(1.0 - x1 * x1)])
            match = bool(np.min(np.linalg.norm(np.abs(res.points) - tgt, axis=1)) < 1e-8)
        rows.append(PersistenceRow(float(d), bool(band[0] < np.arctan(d) < band[1]), len(res), len(res.clusters()), match))
    return rows


def ellipse_verify(a, b, d, n=512, n_seeds=200, rng=0):
    """Front residuals, degree and singular-point diagnostics as a JSON-ready dict."""
    F = appendix_octic(a, b, d)
    ell = SphericalEllipse(a, b)
    report = {
        "a": float(a),
        "b": float(b),
        "d": float(d),
        "degree": int(F.degree),
        "front_residuals": front_residuals(F, ell, d, n),
    }
    pts = appendix_singular_points(a, b, d)
    report["complex_singular_points"] = pts.complex
    report["singular_points"] = [p.as_dict() for p in pts]
    report["gradient_norms"] = [p.lifted_gradient_norm for p in pts]
    found = search_singular_points(a, b, d, n_seeds, rng)
    report["newton_singular_points"] = found.points.tolist()
    report["newton_residuals"] = found.residuals.tolist()
    if pts.points:
        lifted = np.array([p.lifted for p in pts])
        if len(found):
            dist = np.min(np.linalg.norm(lifted[:, None, :] - found.points[None, :, :], axis=2), axis=1)
            report["newton_match_distance"] = dist.tolist()
    return report


__all__ = [
    "SphericalEllipse",
    "ellipse_boundary",
    "octic_a2b1_expr",
    "octic_general_expr",
    "appendix_octic_a2b1",
    "appendix_octic_general",
    "appendix_octic",
    "front_residuals",
    "AppendixPoint",
    "AppendixSingularPoints",
    "appendix_singular_points",
    "printed_singular_x1",
    "printed_singular_x3",
    "random_sphere_seeds",
    "search_singular_points",
    "PersistenceRow",
    "singular_persistence_scan",
    "ellipse_verify",
]
