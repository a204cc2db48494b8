"""Functions on the phase space restricted to circles of radius r.

A polynomial in ``(x1, x2, x3)`` of degree N restricts to every such circle
as a trigonometric polynomial of degree at most N. This module measures that
degree by FFT, fits polynomials back by least squares, and carries the
three-term recurrence satisfied by the Fourier coefficients of quotients
``(F - F0) / (x3 - h)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .algebraic import TrivariatePoly
from .exceptions import CircleOutsideDomain, RankDeficient
from .geometry import Surface, geodesic_distance, geodesic_circle, normalize_point, tangent_frame
from .magnetic import MagneticParams, larmor_circle_point


# ---------------------------------------------------------------------------
# restriction to circles
# ---------------------------------------------------------------------------


@dataclass
class CircleRestriction:
    """Samples of a function on ``2M`` uniform angles of a circle and their DFT."""

    center: np.ndarray
    r: float
    samples: np.ndarray
    fourier: np.ndarray = field(repr=False)  # numpy FFT order, divided by 2M

    @property
    def M(self):
        return len(self.samples) // 2

    def coefficient(self, k):
        """``g_k`` for ``|k| <= M``."""
        k = int(k)
        if abs(k) > self.M:
            raise IndexError(k)
        return self.fourier[k % len(self.fourier)]

    def coefficients(self):
        """``(k, g_k)`` for ``k = -M .. M-1`` in increasing order."""
        n = len(self.fourier)
        k = np.fft.fftfreq(n, 1.0 / n).astype(int)
        o = np.argsort(k)
        return k[o], self.fourier[o]

    def parseval_error(self):
        lhs = float(np.sum(np.abs(self.fourier) ** 2))
        rhs = float(np.mean(np.abs(self.samples) ** 2))
        return abs(lhs - rhs) / max(rhs, np.finfo(float).tiny)


def restrict_to_circle(F, center, r, M=32, kind=Surface.SPHERE, in_domain=None):
    """Restrict ``F`` to the circle of radius ``r`` about ``center``.

    ``F`` maps ``(n, 3)`` arrays to ``(n,)`` values. ``in_domain``, if given,
    is a predicate on single points; a sample failing it raises
    :class:`CircleOutsideDomain`.
    """
    kind = Surface.parse(kind)
    c = normalize_point(kind, np.asarray(center, dtype=float))
    m = MagneticParams.from_radius(kind, r) if _valid_radius(kind, r) else None
    tau = 2.0 * np.pi * np.arange(2 * M) / (2 * M)
    if m is not None:
        pts = larmor_circle_point(c, m, tau).x
    else:
        pts = geodesic_circle(kind, c, r, tau)[0]
    if in_domain is not None:
        for p in pts:
            if not in_domain(p):
                raise CircleOutsideDomain("circle leaves the phase space")
    vals = np.asarray(F(pts))
    return CircleRestriction(c, float(r), vals, np.fft.fft(vals) / (2 * M))


def _valid_radius(kind, r):
    return r > 0 and (kind is Surface.HYPERBOLIC or r < np.pi / 2)


def trig_degree(c, tol=1e-9):
    """Largest ``|k|`` with ``|g_k| > tol * max |g|``; equals ``M`` when saturated."""
    k, g = c.coefficients()
    a = np.abs(g)
    top = a.max()
    if top == 0:
        return 0
    big = a > tol * top
    return int(np.max(np.abs(k[big])))


def is_saturated(c, tol=1e-9):
    """Whether the spectrum reaches the Nyquist band, so the degree is not resolved."""
    return trig_degree(c, tol) >= c.M - 1


# ---------------------------------------------------------------------------
# polynomial fitting
# ---------------------------------------------------------------------------


def reduced_exponents(N):
    """Monomials of degree ``<= N`` with ``x3`` exponent 0 or 1.

    Modulo ``Lambda - 1`` every ``x3^2`` can be traded for a polynomial in
    ``x1, x2`` on both surfaces, so this is a basis of the restrictions.
    """
    out = []
    for k in (0, 1):
        for tot in range(N + 1 - k):
            for i in range(tot, -1, -1):
                out.append((i, tot - i, k))
    return out


class SurfacePolynomialRegressor(RegressorMixin, BaseEstimator):
    """Least-squares fit of values on surface points by a reduced polynomial basis.

    Columns are scaled by their max absolute value before the solve. A
    relative singular-value floor of ``rcond`` triggers
    :class:`RankDeficient`.
    """

    def __init__(self, degree=2, rcond=1e-13):
        self.degree = degree
        self.rcond = rcond

    def _design(self, X):
        E = self.exponents_
        pw = X[:, :, None] ** np.arange(self.degree + 1)
        return pw[:, 0, E[:, 0]] * pw[:, 1, E[:, 1]] * pw[:, 2, E[:, 2]]

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=float, y_numeric=True)
        if X.shape[1] != 3:
            raise ValueError("X must hold points of R^3")
        if int(self.degree) < 0:
            raise ValueError("degree must be non-negative")
        self.exponents_ = np.array(reduced_exponents(int(self.degree)), dtype=int)
        self.n_features_in_ = 3
        A = self._design(X)
        if A.shape[0] < A.shape[1]:
            raise RankDeficient(f"{A.shape[0]} samples for {A.shape[1]} monomials")
        scale = np.max(np.abs(A), axis=0)
        scale[scale == 0] = 1.0
        coef, _, rank, sv = np.linalg.lstsq(A / scale, y, rcond=None)
        if sv[-1] < self.rcond * sv[0]:
            raise RankDeficient(f"condition {sv[0] / sv[-1]:.3g} after basis reduction")
        self.coef_ = coef / scale
        self.singular_values_ = sv
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X, dtype=float)
        return self._design(X) @ self.coef_

    @property
    def polynomial_(self):
        check_is_fitted(self, "coef_")
        return TrivariatePoly({tuple(e): c for e, c in zip(self.exponents_, self.coef_)})


@dataclass
class SampleSpec:
    """Circle points of radius ``r`` about centers in the domain.

    ``centers`` are the training centers; ``holdout`` centers give an
    independent evaluation set. Each center contributes ``n_angles`` points.
    """

    kind: Surface
    r: float
    centers: np.ndarray
    holdout: np.ndarray
    n_angles: int = 64

    def points(self, which="train"):
        cs = self.centers if which == "train" else self.holdout
        tau = 2.0 * np.pi * (np.arange(self.n_angles) + 0.5) / self.n_angles
        pts = [geodesic_circle(self.kind, c, self.r, tau)[0] for c in cs]
        return np.concatenate(pts, axis=0)

    @classmethod
    def for_boundary(cls, b, r, n_centers=24, n_holdout=8, n_angles=64, rng=0):
        rng = np.random.default_rng(rng)
        return cls(b.kind, float(r), domain_points(b, n_centers, rng), domain_points(b, n_holdout, rng), n_angles)


def domain_points(b, n, rng=None):
    """Random points inside the boundary ``b`` (rejection in a geodesic disc)."""
    rng = np.random.default_rng(rng)
    kind = b.kind
    c0 = b.centroid()
    xs, _ = b.evaluate(b.grid(512))
    R = float(np.max(geodesic_distance(kind, xs, c0)))
    e, f = tangent_frame(kind, c0)
    out = []
    while len(out) < n:
        rho = R * np.sqrt(rng.uniform(0, 1, 4 * n))
        phi = rng.uniform(0, 2 * np.pi, 4 * n)
        v = np.cos(phi)[:, None] * e + np.sin(phi)[:, None] * f
        p = kind.C(rho)[:, None] * c0 + kind.S(rho)[:, None] * v
        out.extend(p[b.contains(p, tol=0.0)])
    return np.array(out[:n])


def fit_polynomial(F, kind, N, sample_spec):
    """Fit ``F`` by a degree-``N`` polynomial; returns ``(poly, held-out sup residual)``."""
    kind = Surface.parse(kind)
    X = sample_spec.points("train")
    reg = SurfacePolynomialRegressor(degree=N).fit(X, F(X))
    H = sample_spec.points("holdout")
    resid = float(np.max(np.abs(reg.predict(H) - F(H))))
    return reg.polynomial_, resid


def random_polynomial(N, rng=None, scale=1.0):
    """Dense random polynomial of total degree exactly ``N``."""
    rng = np.random.default_rng(rng)
    terms = {}
    for i, j, k in product(range(N + 1), repeat=3):
        if i + j + k <= N:
            terms[(i, j, k)] = scale * rng.normal()
    terms[(N, 0, 0)] = terms.get((N, 0, 0), 0.0) + scale
    return TrivariatePoly(terms)


# ---------------------------------------------------------------------------
# recurrence for the quotient coefficients
# ---------------------------------------------------------------------------


def recurrence_coefficients(r, alpha, kind):
    """``(outer, middle)`` so that the relation reads ``outer (g_{k+1} + g_{k-1}) + middle g_k``.

    Both come from ``2 (x3 - h)`` on the circle at distance ``alpha``:
    ``2 (C(alpha) - 1) h`` equals ``-4 cos r sin^2(alpha/2)`` on the sphere
    and ``+4 cosh r sinh^2(alpha/2)`` on the hyperboloid.
    """
    kind = Surface.parse(kind)
    outer = kind.S(alpha) * kind.S(r)
    half = kind.S(alpha / 2.0)
    middle = -4.0 * kind.C(r) * half**2 if kind is Surface.SPHERE else 4.0 * kind.C(r) * half**2
    return float(outer), float(middle)


def recurrence_lhs(g, r, alpha, kind):
    """Left-hand side for every interior index of the coefficient array ``g`` (k ascending)."""
    outer, middle = recurrence_coefficients(r, alpha, kind)
    g = np.asarray(g)
    return outer * (g[2:] + g[:-2]) + middle * g[1:-1]


def recurrence_residual(g, r, alpha, kind, k_range=None):
    """Max ``|LHS_k|`` of the recurrence; ``g`` maps index to coefficient.

    ``g`` is either a callable ``k -> g_k`` or a pair ``(ks, values)``.
    """
    outer, middle = recurrence_coefficients(r, alpha, kind)
    if callable(g):
        get = g
        ks = list(k_range)
    else:
        ks_all, vals = g
        table = dict(zip((int(k) for k in ks_all), vals))
        get = lambda k: table.get(int(k), 0.0)  # noqa: E731
        ks = list(k_range) if k_range is not None else sorted(table)[1:-1]
    worst = 0.0
    for k in ks:
        worst = max(worst, abs(outer * (get(k + 1) + get(k - 1)) + middle * get(k)))
    return worst


def recurrence_discriminant(r, alpha, kind):
    """``cot^2 r tan^2(alpha/2) - 1`` (``coth``/``tanh`` on the hyperboloid)."""
    kind = Surface.parse(kind)
    if kind is Surface.SPHERE:
        return float((np.tan(alpha / 2.0) / np.tan(r)) ** 2 - 1.0)
    return float((np.tanh(alpha / 2.0) / np.tanh(r)) ** 2 - 1.0)


def characteristic_root(r, alpha, kind):
    """A root ``lambda`` of ``outer lambda^2 + middle lambda + outer = 0`` (unit modulus when D < 0)."""
    outer, middle = recurrence_coefficients(r, alpha, kind)
    return complex(np.roots([outer, middle, outer])[0])


def axial_circle(kind, r, alpha, t):
    """Circle of radius ``r`` about the point at distance ``alpha`` from the pole along x2.

    ``x3 - cos r`` (``cosh r``) on it is ``S(r) S(alpha) cos t + (C(alpha) - 1) C(r)``.
    """
    kind = Surface.parse(kind)
    t = np.asarray(t, dtype=float)
    base = np.stack([kind.S(r) * np.sin(t), kind.S(r) * np.cos(t), np.full_like(t, kind.C(r))], axis=-1)
    ca, sa = kind.C(alpha), kind.S(alpha)
    if kind is Surface.SPHERE:
        R = np.array([[1, 0, 0], [0, ca, -sa], [0, sa, ca]])
    else:
        R = np.array([[1, 0, 0], [0, ca, sa], [0, sa, ca]])
    return base @ R.T


def quotient_by_height(P, h):
    """``(P(x) - P(x1, x2, h)) / (x3 - h)`` as an exact polynomial."""
    out = {}
    for (i, j, k), c in P.terms.items():
        # x3^k - h^k = (x3 - h) * sum_{m < k} x3^m h^(k-1-m)
        for m_ in range(k):
            e = (i, j, m_)
            out[e] = out.get(e, 0.0) + c * h ** (k - 1 - m_)
    return TrivariatePoly(out)


def height_fix(P, h):
    """``P(x1, x2, h)``: agrees with ``P`` on the circle ``{x3 = h}``."""
    out = {}
    for (i, j, k), c in P.terms.items():
        out[(i, j, 0)] = out.get((i, j, 0), 0.0) + c * h**k
    return TrivariatePoly(out)


__all__ = [
    "CircleRestriction",
    "restrict_to_circle",
    "trig_degree",
    "is_saturated",
    "reduced_exponents",
    "SurfacePolynomialRegressor",
    "SampleSpec",
    "domain_points",
    "fit_polynomial",
    "random_polynomial",
    "recurrence_coefficients",
    "recurrence_lhs",
    "recurrence_residual",
    "recurrence_discriminant",
    "characteristic_root",
    "axial_circle",
    "quotient_by_height",
    "height_fix",
]
