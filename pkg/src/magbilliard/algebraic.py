"""Polynomials in (x1, x2, x3) and degree-N homogeneous functions p + q sqrt(Lambda).

:class:`TrivariatePoly` stores a sparse coefficient map keyed by exponent
triples and supports ring arithmetic with scalars, so long closed-form
expressions can be transcribed directly as Python arithmetic.
"""

from __future__ import annotations

import json
import numbers
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .exceptions import DegreeTooLow, MaxPointsExceeded, SingularPoint
from .geometry import (
    Surface,
    exp_map,
    geodesic_distance,
    metric_inner,
    metric_norm,
    normalize_point,
    normalize_tangent,
    project_tangent,
)

GRAD_EPS = 1e-12


class TrivariatePoly:
    """Sparse real polynomial ``sum c_e x1^i x2^j x3^k``; zero coefficients are dropped."""

    __slots__ = ("terms", "__dict__")

    def __init__(self, terms=None):
        clean = {}
        for e, c in (terms or {}).items():
            e = tuple(int(v) for v in e)
            if len(e) != 3 or min(e) < 0:
                raise ValueError(f"bad exponent {e}")
            c = float(c)
            if c != 0.0:
                clean[e] = clean.get(e, 0.0) + c
        self.terms = {e: c for e, c in clean.items() if c != 0.0}

    # constructors
    @classmethod
    def constant(cls, c):
        return cls({(0, 0, 0): c})

    @classmethod
    def variable(cls, i):
        e = [0, 0, 0]
        e[i] = 1
        return cls({tuple(e): 1.0})

    @classmethod
    def variables(cls):
        return cls.variable(0), cls.variable(1), cls.variable(2)

    @classmethod
    def lam(cls, kind):
        q = Surface.parse(kind).lambda_diag
        return cls({(2, 0, 0): q[0], (0, 2, 0): q[1], (0, 0, 2): q[2]})

    # structure
    @property
    def degree(self):
        return max((sum(e) for e in self.terms), default=0)

    def is_zero(self):
        return not self.terms

    def is_homogeneous(self, n=None):
        degs = {sum(e) for e in self.terms}
        if n is None:
            return len(degs) <= 1
        return degs <= {n}

    def component(self, k):
        """Homogeneous part of degree ``k``."""
        return TrivariatePoly({e: c for e, c in self.terms.items() if sum(e) == k})

    def max_abs_coefficient(self):
        return max((abs(c) for c in self.terms.values()), default=0.0)

    def normalized(self):
        s = self.max_abs_coefficient()
        return self if s == 0 else self * (1.0 / s)

    def __repr__(self):
        return f"TrivariatePoly({len(self.terms)} terms, degree {self.degree})"

    def __eq__(self, other):
        if isinstance(other, numbers.Real):
            other = TrivariatePoly.constant(other)
        if not isinstance(other, TrivariatePoly):
            return NotImplemented
        return self.terms == other.terms

    __hash__ = None

    # arithmetic
    @staticmethod
    def _coerce(other):
        if isinstance(other, TrivariatePoly):
            return other
        if isinstance(other, numbers.Real):
            return TrivariatePoly.constant(float(other))
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0.0) + c
        return TrivariatePoly(out)

    __radd__ = __add__

    def __neg__(self):
        return TrivariatePoly({e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, numbers.Real):
            return TrivariatePoly({e: c * float(other) for e, c in self.terms.items()})
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = (e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2])
                out[e] = out.get(e, 0.0) + c1 * c2
        return TrivariatePoly(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, numbers.Real):
            return NotImplemented
        return self * (1.0 / float(other))

    def __pow__(self, n):
        if not isinstance(n, numbers.Integral) or n < 0:
            raise ValueError("only non-negative integer powers")
        out = TrivariatePoly.constant(1.0)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    # calculus
    def diff(self, i):
        out = {}
        for e, c in self.terms.items():
            if e[i] > 0:
                f = list(e)
                f[i] -= 1
                out[tuple(f)] = c * e[i]
        return TrivariatePoly(out)

    @cached_property
    def _arrays(self):
        if not self.terms:
            return np.zeros((0, 3), dtype=int), np.zeros(0)
        E = np.array(list(self.terms.keys()), dtype=int)
        C = np.array(list(self.terms.values()), dtype=float)
        return E, C

    @cached_property
    def _grad_polys(self):
        return tuple(self.diff(i) for i in range(3))

    @cached_property
    def _hess_polys(self):
        g = self._grad_polys
        return tuple(tuple(g[i].diff(j) for j in range(3)) for i in range(3))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        E, C = self._arrays
        if len(C) == 0:
            return np.zeros(x.shape[:-1])
        deg = int(E.max())
        # power tables, shape (..., 3, deg + 1)
        pw = x[..., :, None] ** np.arange(deg + 1)
        mono = pw[..., 0, E[:, 0]] * pw[..., 1, E[:, 1]] * pw[..., 2, E[:, 2]]
        return mono @ C

    @cached_property
    def _jet_tables(self):
        # value, gradient and Hessian share the monomials of the polynomial
        # and of its derivatives; one coefficient column per output
        g = self._grad_polys
        h = self._hess_polys
        polys = [self, g[0], g[1], g[2]] + [h[i][j] for i in range(3) for j in range(3)]
        exps = sorted({e for P in polys for e in P.terms})
        if not exps:
            return np.zeros((0, 3), dtype=int), np.zeros((0, 13))
        index = {e: n for n, e in enumerate(exps)}
        C = np.zeros((len(exps), len(polys)))
        for col, P in enumerate(polys):
            for e, c in P.terms.items():
                C[index[e], col] = c
        return np.array(exps, dtype=int), C

    def jet(self, x):
        """Value, gradient and Hessian in one pass."""
        x = np.asarray(x, dtype=float)
        E, C = self._jet_tables
        lead = x.shape[:-1]
        if len(E) == 0:
            return np.zeros(lead), np.zeros(lead + (3,)), np.zeros(lead + (3, 3))
        deg = int(E.max())
        pw = x[..., :, None] ** np.arange(deg + 1)
        mono = pw[..., 0, E[:, 0]] * pw[..., 1, E[:, 1]] * pw[..., 2, E[:, 2]]
        out = mono @ C
        return out[..., 0], out[..., 1:4], out[..., 4:].reshape(lead + (3, 3))

    def gradient(self, x):
        return self.jet(x)[1]

    def hessian(self, x):
        return self.jet(x)[2]

    # exchange
    def to_dict(self):
        return [{"e": list(e), "c": c} for e, c in sorted(self.terms.items())]

    @classmethod
    def from_dict(cls, items):
        return cls({tuple(t["e"]): t["c"] for t in items})


def poly_to_json(poly, kind=None, N=None, **extra):
    """Serialize as ``{"N": ..., "kind": ..., "terms": [{"e": [i, j, k], "c": c}, ...]}``."""
    doc = {"N": int(poly.degree if N is None else N),
           "kind": None if kind is None else Surface.parse(kind).label,
           "terms": poly.to_dict()}
    doc.update(extra)
    return json.dumps(doc, indent=1)


def poly_from_json(text):
    doc = json.loads(text)
    items = doc["terms"] if isinstance(doc, dict) else doc
    poly = TrivariatePoly.from_dict(items)
    kind = doc.get("kind") if isinstance(doc, dict) else None
    return poly, (Surface.parse(kind) if kind else None)


@dataclass(frozen=True)
class HomogeneousSurfaceFn:
    """Degree-``N`` homogeneous extension ``p + q sqrt(Lambda)`` of a surface polynomial."""

    p: TrivariatePoly
    q: TrivariatePoly
    N: int
    kind: Surface
    _qdiag: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "kind", Surface.parse(self.kind))
        if self.N < 2:
            raise DegreeTooLow(f"degree {self.N} < 2")
        if not self.p.is_homogeneous(self.N):
            raise ValueError("p must be homogeneous of degree N")
        if not self.q.is_homogeneous(self.N - 1):
            raise ValueError("q must be homogeneous of degree N - 1")
        object.__setattr__(self, "_qdiag", self.kind.lambda_diag)

    def _lam(self, x):
        L = np.sum(self._qdiag * x * x, axis=-1)
        if np.any(L <= 0):
            raise ValueError("evaluation at or beyond the absolute Lambda <= 0")
        return L

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        val = self.p(x)
        if not self.q.is_zero():
            val = val + self.q(x) * np.sqrt(self._lam(x))
        return val

    def eval_grad_hess(self, x):
        """Value, gradient and Hessian at ambient points with ``Lambda > 0``."""
        x = np.asarray(x, dtype=float)
        F, g, H = self.p.jet(x)
        if not self.q.is_zero():
            w = np.sqrt(self._lam(x))[..., None]
            Qx = self._qdiag * x
            dw = Qx / w
            ddw = np.eye(3) * self._qdiag / w[..., None] - Qx[..., :, None] * Qx[..., None, :] / (w**3)[..., None]
            q0, dq, Hq = self.q.jet(x)
            qv = q0[..., None]
            F = F + qv[..., 0] * w[..., 0]
            g = g + w * dq + qv * dw
            H = (H + w[..., None] * Hq
                 + dq[..., :, None] * dw[..., None, :] + dw[..., :, None] * dq[..., None, :]
                 + qv[..., None] * ddw)
        return F, g, H

    def gradient_norm(self, x):
        """``sqrt(<A grad, grad>)``; NaN where the form is not positive."""
        _, g, _ = self.eval_grad_hess(x)
        n2 = metric_inner(self.kind, g, g)
        return np.sqrt(np.where(n2 > 0, n2, np.nan))

    def max_abs_coefficient(self):
        return max(self.p.max_abs_coefficient(), self.q.max_abs_coefficient())

    def scaled(self, c):
        return HomogeneousSurfaceFn(self.p * c, self.q * c, self.N, self.kind)

    def normalized(self):
        s = self.max_abs_coefficient()
        return self if s == 0 else self.scaled(1.0 / s)


def homogenize(F, kind, N=None):
    """Extend ``F`` off the surface as ``sum_k F_k sqrt(Lambda)^(N - k)``."""
    kind = Surface.parse(kind)
    if F.is_zero():
        raise ValueError("zero polynomial")
    N = F.degree if N is None else int(N)
    if N < F.degree:
        raise ValueError("N below the polynomial degree")
    if N < 2:
        raise DegreeTooLow("degree-1 integrals force a round disc; need N >= 2")
    L = TrivariatePoly.lam(kind)
    p = TrivariatePoly()
    q = TrivariatePoly()
    for k in range(N + 1):
        Fk = F.component(k)
        if Fk.is_zero():
            continue
        m = N - k
        if m % 2 == 0:
            p = p + Fk * L ** (m // 2)
        else:
            q = q + Fk * L ** ((m - 1) // 2)
    return HomogeneousSurfaceFn(p, q, N, kind)


def round_case_polynomial(kind, rho, r):
    """``(x3 - c+)(x3 - c-)`` vanishing on both fronts of a circle about the pole."""
    kind = Surface.parse(kind)
    X3 = TrivariatePoly.variable(2)
    return (X3 - float(kind.C(abs(rho - r)))) * (X3 - float(kind.C(rho + r)))


def eval_grad_hess(Ft, x):
    return Ft.eval_grad_hess(x)


def _checked_norm(Ft, x, g):
    n2 = metric_inner(Ft.kind, g, g)
    bad = np.asarray(n2 <= GRAD_EPS)
    if np.any(bad):
        pts = np.asarray(x)[bad] if np.ndim(x) > 1 else np.asarray(x)
        raise SingularPoint(f"<A grad F, grad F> = {np.min(n2):.3g} <= {GRAD_EPS:g}", point=pts)
    return np.sqrt(n2)


def implicit_geodesic_curvature(Ft, x):
    """``det H / ((N - 1)^2 |grad F|^3)``, signed against the normal ``A grad F / |grad F|``."""
    _, g, H = Ft.eval_grad_hess(x)
    nrm = _checked_norm(Ft, x, g)
    return np.linalg.det(H) / ((Ft.N - 1) ** 2 * nrm**3)


def remarkable_quantity(Ft, x, m, side):
    """``det H / (N - 1)^2 - side * beta |grad F|^3``."""
    sgn = 1.0 if side in (1, "+", +1.0) else -1.0
    _, g, H = Ft.eval_grad_hess(x)
    nrm = _checked_norm(Ft, x, g)
    return np.linalg.det(H) / (Ft.N - 1) ** 2 - sgn * m.beta * nrm**3


def restricted_gradient_norm(Ft, x):
    """Metric norm of the tangential part of ``A grad F`` at surface points."""
    _, g, _ = Ft.eval_grad_hess(x)
    tg = project_tangent(Ft.kind, x, g * Ft.kind.metric_diag)
    return metric_norm(Ft.kind, tg)


# ---------------------------------------------------------------------------
# level curves
# ---------------------------------------------------------------------------


def _correct(Ft, x, tol=1e-14, max_iter=30):
    """Minimum-norm damped Newton onto ``{F = 0, Lambda = 1}``, then renormalize."""
    kind = Ft.kind
    qd = kind.lambda_diag
    x = np.asarray(x, dtype=float)

    def resid(y):
        return np.array([Ft(y), np.sum(qd * y * y) - 1.0])

    r = resid(x)
    for _ in range(max_iter):
        if abs(r[0]) < tol and abs(r[1]) < tol:
            break
        _, g, _ = Ft.eval_grad_hess(x)
        J = np.stack([g, 2.0 * qd * x])
        dx = -np.linalg.lstsq(J, r, rcond=None)[0]
        lam_ = 1.0
        for _ in range(50):
            y = x + lam_ * dx
            ry = resid(y)
            if np.linalg.norm(ry) < np.linalg.norm(r) or lam_ < 1e-12:
                break
            lam_ *= 0.5
        if np.array_equal(y, x):
            break
        x, r = y, ry
    return normalize_point(kind, x)


def trace_level_curve(Ft, seed, step=1e-2, max_points=100_000, tol=1e-10):
    """Trace the component of ``{F = 0}`` on the surface through ``seed``.

    Predictor along ``-A [x, A grad F] / |grad F|``, Newton corrector. Stops
    when the curve returns within ``step / 2`` of its start.
    """
    kind = Ft.kind
    x0 = _correct(Ft, seed)
    pts = [x0]
    x = x0
    travelled = 0.0
    v_prev = None
    while True:
        _, g, _ = Ft.eval_grad_hess(x)
        n2 = metric_inner(kind, g, g)
        if n2 <= 1e-10 * max(1.0, Ft.max_abs_coefficient()) ** 2:
            raise SingularPoint("level curve runs into a singular point", point=x, points=np.array(pts))
        Ag = g * kind.metric_diag
        v = -np.cross(x, Ag) * kind.metric_diag
        v = normalize_tangent(kind, x, v)
        # the gradient changes sign only through a zero: a reversed predictor
        # means a singular point was stepped over
        if v_prev is not None and float(np.dot(v, v_prev)) < 0:
            raise SingularPoint("level curve crosses a singular point", point=x, points=np.array(pts))
        v_prev = v
        x = _correct(Ft, exp_map(kind, x, v, step))
        if abs(Ft(x)) > tol:
            raise SingularPoint("corrector failed to reach the level set", point=x, points=np.array(pts))
        travelled += step
        if travelled > 2.5 * step and float(geodesic_distance(kind, x, x0)) < 0.5 * step:
            break
        pts.append(x)
        if len(pts) >= max_points:
            raise MaxPointsExceeded(f"no closure after {max_points} points", points=np.array(pts))
    return np.array(pts)


# ---------------------------------------------------------------------------
# singular points
# ---------------------------------------------------------------------------


@dataclass
class SingularSearch:
    """Converged singular points with residuals; ``dropped`` counts failed seeds."""

    points: np.ndarray
    residuals: np.ndarray
    dropped: int
    mu: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(zip(self.points, self.residuals))

    def clusters(self, radius=1e-4):
        """Representatives (lowest residual) of points grouped within ``radius``.

        Degenerate singularities such as cusps make the Newton system
        rank-deficient at the solution; convergence there is only linear and
        the converged points scatter well beyond the dedup tolerance.
        """
        reps = []
        for i in np.argsort(self.residuals):
            p = self.points[i]
            if all(np.linalg.norm(p - q) >= radius for q in reps):
                reps.append(p)
        return np.array(reps).reshape(-1, 3)


def _singular_system(Fn, x, mu):
    """Residuals ``(n, 5)`` and Jacobians ``(n, 5, 4)`` for stacked unknowns."""
    qd = Fn.kind.lambda_diag
    F, g, H = Fn.eval_grad_hess(x)
    dL = 2.0 * qd * x
    r = np.concatenate([g - mu[:, None] * dL, F[:, None], (np.sum(qd * x * x, axis=1) - 1.0)[:, None]], axis=1)
    J = np.zeros((len(x), 5, 4))
    J[:, :3, :3] = H - 2.0 * mu[:, None, None] * np.diag(qd)
    J[:, :3, 3] = -dL
    J[:, 3, :3] = g
    J[:, 4, :3] = dL
    return r, J


def find_singular_points(Ft, seeds, tol=1e-10, dedup=1e-8, max_iter=100):
    """Gauss-Newton on ``{grad F = mu grad Lambda, F = 0, Lambda = 1}`` from each seed.

    All seeds iterate together, each with its own step-halving line search.
    ``F`` is scaled to unit max coefficient first so the residual tolerance
    is scale-free.
    """
    Fn = Ft.normalized()
    kind = Fn.kind
    qd = kind.lambda_diag
    seeds = np.atleast_2d(np.asarray(seeds, dtype=float))
    ok_seed = np.sum(qd * seeds * seeds, axis=1) > 0
    x = np.zeros_like(seeds)
    x[ok_seed] = normalize_point(kind, seeds[ok_seed])
    x = x[ok_seed]
    _, g, _ = Fn.eval_grad_hess(x)
    dL = 2.0 * qd * x
    mu = np.sum(g * dL, axis=1) / np.sum(dL * dL, axis=1)
    z = np.column_stack([x, mu])
    r, J = _singular_system(Fn, z[:, :3], z[:, 3])
    nr = np.linalg.norm(r, axis=1)
    active = np.ones(len(z), dtype=bool)
    for _ in range(max_iter):
        active &= nr >= tol
        if not active.any():
            break
        idx = np.nonzero(active)[0]
        dz = -np.einsum("nij,nj->ni", np.linalg.pinv(J[idx]), r[idx])
        lam_ = np.ones(len(idx))
        pending = np.ones(len(idx), dtype=bool)
        zt = z[idx].copy()
        rt = r[idx].copy()
        Jt = J[idx].copy()
        for _ in range(50):
            k = np.nonzero(pending)[0]
            if len(k) == 0:
                break
            cand = z[idx[k]] + lam_[k, None] * dz[k]
            good = np.all(np.isfinite(cand), axis=1) & (np.abs(cand[:, :3]).max(axis=1) < 1e6)
            rc = np.full((len(k), 5), np.inf)
            Jc = np.zeros((len(k), 5, 4))
            if good.any():
                rc[good], Jc[good] = _singular_system(Fn, cand[good, :3], cand[good, 3])
            better = np.linalg.norm(rc, axis=1) < nr[idx[k]]
            acc = k[better]
            zt[acc], rt[acc], Jt[acc] = cand[better], rc[better], Jc[better]
            pending[acc] = False
            lam_[k[~better]] *= 0.5
        stalled = idx[pending]
        active[stalled] = False
        moved = idx[~pending]
        z[moved], r[moved], J[moved] = zt[~pending], rt[~pending], Jt[~pending]
        nr[moved] = np.linalg.norm(r[moved], axis=1)
    conv = nr < tol
    if kind is Surface.HYPERBOLIC:
        conv &= z[:, 2] > 0
    found, res, mus = [], [], []
    for zi, ri in zip(z[conv], nr[conv]):
        if any(np.linalg.norm(zi[:3] - y) < dedup for y in found):
            continue
        found.append(zi[:3])
        res.append(float(ri))
        mus.append(float(zi[3]))
    dropped = int(len(seeds) - conv.sum())
    pts = np.array(found).reshape(-1, 3)
    return SingularSearch(pts, np.array(res), dropped, np.array(mus))


__all__ = [
    "TrivariatePoly",
    "poly_to_json",
    "poly_from_json",
    "HomogeneousSurfaceFn",
    "homogenize",
    "round_case_polynomial",
    "eval_grad_hess",
    "implicit_geodesic_curvature",
    "remarkable_quantity",
    "restricted_gradient_norm",
    "trace_level_curve",
    "SingularSearch",
    "find_singular_points",
]
