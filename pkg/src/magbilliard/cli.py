"""Command-line front-end.

Every subcommand reads an optional JSON config (``--config``) whose fields
are overridden by explicit flags, and writes its artifacts into ``--out``.
Exit codes: 0 ok, 2 inadmissible, 3 solver failure, 4 singular point.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from . import io as mio
from .algebraic import (
    homogenize,
    poly_from_json,
    poly_to_json,
    remarkable_quantity,
    restricted_gradient_norm,
    round_case_polynomial,
)
from .billiard import (
    GeodesicCircleBoundary,
    MagneticBilliard,
    curvature_extrema,
    sampled_boundary,
)
from .ellipse_appendix import SphericalEllipse, ellipse_verify, singular_persistence_scan
from .exceptions import (
    DegenerateBand,
    NotAdmissible,
    SingularPoint,
    SolverError,
)
from .fronts import check_beta_inequalities, jacobi_Y, parallel_point, singular_band, trace_front
from .geometry import Surface
from .harmonics import SampleSpec, SurfacePolynomialRegressor, fit_polynomial, random_polynomial
from .magnetic import MagneticParams

EXIT_OK = 0
EXIT_INADMISSIBLE = 2
EXIT_SOLVER = 3
EXIT_SINGULAR = 4


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


def load_config(args):
    cfg = {}
    if args.config:
        cfg = json.loads(Path(args.config).read_text())
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
    # flags override config fields
    for key, val in vars(args).items():
        if key in ("config", "func", "command") or val is None:
            continue
        if isinstance(val, bool) and not val and key in cfg:
            continue
        cfg[key] = val
    bnd = dict(cfg.get("boundary") or {})
    for key in ("rho", "a", "b", "points"):
        if key in cfg and key not in bnd:
            bnd[key] = cfg[key]
    if "type" not in bnd:
        if "points" in bnd:
            bnd["type"] = "sampled"
        elif "a" in bnd or "b" in bnd:
            bnd["type"] = "ellipse"
        elif "rho" in bnd:
            bnd["type"] = "circle"
    cfg["boundary"] = bnd
    cfg.setdefault("surface", "sphere")
    cfg.setdefault("seed", 0)
    cfg.setdefault("out", ".")
    return cfg


def build_boundary(cfg):
    kind = Surface.parse(cfg["surface"])
    bnd = cfg["boundary"]
    typ = bnd.get("type")
    if typ == "circle":
        return GeodesicCircleBoundary(kind, float(bnd["rho"]), bnd.get("center"))
    if typ == "ellipse":
        if kind is not Surface.SPHERE:
            raise ConfigError("the cone ellipse lives on the sphere")
        return SphericalEllipse(float(bnd["a"]), float(bnd["b"]))
    if typ == "sampled":
        return sampled_boundary(kind, mio.read_points_csv(bnd["points"]))
    raise ConfigError("boundary needs rho (circle), a and b (ellipse) or points (sampled curve)")


def build_params(cfg, kind):
    beta, r = cfg.get("beta"), cfg.get("r")
    if (beta is None) == (r is None):
        raise ConfigError("give exactly one of beta and r")
    return MagneticParams.from_beta(kind, beta) if beta is not None else MagneticParams.from_radius(kind, r)


def fitted_billiard(cfg, b):
    m = build_params(cfg, b.kind)
    est = MagneticBilliard(b, beta=m.beta, n_grid=int(cfg.get("n_grid", 720)), strict=bool(cfg.get("strict", False)))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", RuntimeWarning)
        est.fit()
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    return est


def _out(cfg, name):
    return Path(cfg["out"]) / name


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _initial_state(cfg, est, rng):
    s0 = cfg.get("s0")
    th0 = cfg.get("theta0")
    if s0 is None:
        s0 = float(rng.uniform(0.0, est.boundary.period))
    if th0 is None:
        th0 = float(rng.uniform(0.1, np.pi - 0.1))
    return est.phase_point(float(s0), float(th0))


def cmd_simulate(cfg):
    b = build_boundary(cfg)
    est = fitted_billiard(cfg, b)
    rng = np.random.default_rng(int(cfg["seed"]))
    P0 = _initial_state(cfg, est, rng)
    orbit = est.orbit(P0, int(cfg.get("steps", 100)))
    mio.write_orbit_csv(_out(cfg, "orbit.csv"), orbit)
    if cfg.get("svg"):
        xs, _ = b.evaluate(b.grid(512))
        bnd = mio.project(b.kind, np.vstack([xs, xs[:1]]))
        centers = mio.project(b.kind, np.array([P.center for P in orbit]))
        chords = []
        for P in orbit:
            x, _ = b.evaluate(np.array(P.s))
            chords.append(x)
        mio.atomic_write(_out(cfg, "orbit.svg"),
                         mio.svg_polylines([bnd, centers, mio.project(b.kind, np.array(chords))]))
    mio.write_json(_out(cfg, "simulate.json"), {
        "steps": len(orbit) - 1,
        "beta": est.params_.beta,
        "r": est.params_.r,
        "admissibility_margin": est.admissibility_margin_,
        "admissible": bool(est.admissible_),
    })
    return EXIT_OK


def cmd_fronts(cfg):
    b = build_boundary(cfg)
    n = int(cfg.get("n", 2048))
    ts = cfg.get("t")
    report = {}
    if ts is None:
        m = build_params(cfg, b.kind)
        ts = [m.r, -m.r]
        ineq = check_beta_inequalities(b, m, n)
        report["beta_inequalities"] = {"holds": ineq.holds, "plus_margin": ineq.plus_margin,
                                       "minus_margin": ineq.minus_margin, "lower_margin": ineq.lower_margin}
    ts = [float(t) for t in np.atleast_1d(ts)]
    try:
        lo, hi = singular_band(b, n=n)
        report["band"] = {"rho_min": lo, "rho_max": hi, "degenerate": False}
    except DegenerateBand as err:
        report["band"] = {"rho_min": err.rho, "rho_max": err.rho, "degenerate": True}
    samples = [trace_front(b, t, n) for t in ts]
    cusps = {}
    for t, fs in zip(ts, samples):
        Y = jacobi_Y(b, fs.s, t)
        idx = np.nonzero(np.sign(Y) != np.sign(np.roll(Y, -1)))[0]
        cusps[fmt_key(t)] = [float(fs.s[i]) for i in idx]
    report["cusp_parameters"] = cusps
    report["singular_samples"] = {fmt_key(t): int(fs.singular.sum()) for t, fs in zip(ts, samples)}
    mio.write_front_csv(_out(cfg, "fronts.csv"), samples)
    mio.write_json(_out(cfg, "fronts.json"), report)
    if cfg.get("svg"):
        lines = [mio.project(b.kind, b.evaluate(b.grid(512))[0])]
        lines += [mio.project(b.kind, fs.points) for fs in samples]
        mio.atomic_write(_out(cfg, "fronts.svg"), mio.svg_polylines(lines))
    return EXIT_OK


def fmt_key(t):
    return mio.fmt(t)


def cmd_curvature(cfg):
    b = build_boundary(cfg)
    n = int(cfg.get("n", 2048))
    s = b.grid(n)
    k = b.curvature(s)
    k_min, s_min, k_max, s_max = curvature_extrema(b, n)
    report = {"period": b.period, "k_min": k_min, "s_min": s_min, "k_max": k_max, "s_max": s_max}
    if cfg.get("beta") is not None or cfg.get("r") is not None:
        m = build_params(cfg, b.kind)
        report["beta"] = m.beta
        report["admissibility_margin"] = k_min - m.beta
        if cfg.get("strict") and k_min - m.beta <= 0:
            mio.write_json(_out(cfg, "curvature.json"), report)
            raise NotAdmissible(k_min - m.beta)
    mio.atomic_write(_out(cfg, "curvature.csv"), mio.csv_text(["s", "curvature"], zip(s, k)))
    mio.write_json(_out(cfg, "curvature.json"), report)
    return EXIT_OK


def _load_poly(cfg, b, m):
    spec = cfg.get("poly")
    if spec in (None, "round"):
        if not isinstance(b, GeodesicCircleBoundary):
            raise ConfigError("the built-in round polynomial needs a circle boundary")
        return round_case_polynomial(b.kind, b.radius, m.r)
    if spec == "appendix":
        return None
    text = Path(spec).read_text()
    return poly_from_json(text)[0]


def cmd_remarkable(cfg):
    b = build_boundary(cfg)
    m = build_params(cfg, b.kind)
    n = int(cfg.get("n", 512))
    poly = _load_poly(cfg, b, m)
    if poly is None:
        from .ellipse_appendix import appendix_octic

        if not isinstance(b, SphericalEllipse):
            raise ConfigError("the appendix octic needs an ellipse boundary")
        poly = appendix_octic(b.a, b.b, m.d)
    if poly.degree == 0:
        raise SingularPoint("constant polynomial: its gradient along the surface vanishes identically")
    Ft = homogenize(poly, b.kind).normalized()
    s = b.grid(n)
    report = {"N": Ft.N, "beta": m.beta, "r": m.r}
    for side, sgn in (("+", 1), ("-", -1)):
        pts = parallel_point(b, s, sgn * m.r)
        try:
            if np.max(restricted_gradient_norm(Ft, pts)) <= 1e-12:
                raise SingularPoint("gradient along the surface vanishes on the whole front", point=pts[0])
            vals = remarkable_quantity(Ft, pts, m, sgn)
        except SingularPoint as err:
            print(f"singular point on front {side}: {err}", file=sys.stderr)
            mio.write_json(_out(cfg, "remarkable.json"), report)
            raise
        mean = float(np.mean(vals))
        std = float(np.std(vals))
        report[side] = {
            "mean": mean,
            "std": std,
            "max_deviation": float(np.max(np.abs(vals - mean))),
            "relative_std": std / abs(mean) if mean != 0 else None,
            "max_level_residual": float(np.max(np.abs(Ft(pts)))),
        }
    mio.write_json(_out(cfg, "remarkable.json"), report)
    mio.atomic_write(_out(cfg, "polynomial.json"), poly_to_json(poly, b.kind) + "\n")
    return EXIT_OK


def cmd_ellipse_verify(cfg):
    a = float(cfg.get("a", cfg["boundary"].get("a", 2.0)))
    b_ = float(cfg.get("b", cfg["boundary"].get("b", 1.0)))
    if cfg.get("sweep"):
        lo, hi, step = (float(v) for v in cfg.get("sweep_range", (0.05, 0.95, 0.05)))
        ds = np.round(np.arange(lo, hi + 0.5 * step, step), 12)
        rows = singular_persistence_scan(a, b_, ds, n_seeds=int(cfg.get("n_seeds", 400)), rng=int(cfg["seed"]))
        table = [r.__dict__ for r in rows]
        mio.write_json(_out(cfg, "ellipse_sweep.json"), {"a": a, "b": b_, "rows": table})
        return EXIT_OK
    d = float(cfg.get("d", 0.3))
    rep = ellipse_verify(a, b_, d, n_seeds=int(cfg.get("n_seeds", 1000)), rng=int(cfg["seed"]))
    mio.write_json(_out(cfg, "ellipse_verify.json"), rep)
    return EXIT_OK


_BUILTINS = {
    "x1": lambda x: x[:, 0],
    "x3": lambda x: x[:, 2],
    "exp_x1": lambda x: np.exp(x[:, 0]),
}


def cmd_polyfit(cfg):
    kind = Surface.parse(cfg["surface"])
    N = int(cfg.get("degree", 2))
    values = cfg.get("values")
    if values:
        data = mio.read_points_csv(values)
        if data.shape[1] != 4:
            raise ConfigError("values CSV needs columns x1,x2,x3,value")
        rng = np.random.default_rng(int(cfg["seed"]))
        perm = rng.permutation(len(data))
        cut = int(0.75 * len(data))
        tr, ho = data[perm[:cut]], data[perm[cut:]]
        reg = SurfacePolynomialRegressor(degree=N).fit(tr[:, :3], tr[:, 3])
        poly = reg.polynomial_
        resid = float(np.max(np.abs(reg.predict(ho[:, :3]) - ho[:, 3]))) if len(ho) else 0.0
        source = str(values)
    else:
        b = build_boundary(cfg)
        m = build_params(cfg, b.kind)
        name = cfg.get("function", "x3")
        if name.startswith("random:"):
            P = random_polynomial(int(name.split(":", 1)[1]), rng=int(cfg["seed"]))
            F = P
        elif name in _BUILTINS:
            F = _BUILTINS[name]
        else:
            raise ConfigError(f"unknown function {name!r}; choose from {sorted(_BUILTINS)} or random:N")
        spec = SampleSpec.for_boundary(b, m.r, rng=int(cfg["seed"]))
        poly, resid = fit_polynomial(F, kind, N, spec)
        source = name
    mio.atomic_write(_out(cfg, "polynomial.json"), poly_to_json(poly, kind, N=N) + "\n")
    mio.write_json(_out(cfg, "polyfit.json"), {"source": source, "degree": N, "holdout_residual": resid})
    return EXIT_OK


def cmd_phase_portrait(cfg):
    b = build_boundary(cfg)
    est = fitted_billiard(cfg, b)
    rng = np.random.default_rng(int(cfg["seed"]))
    n_orbits = int(cfg.get("orbits", 8))
    steps = int(cfg.get("steps", 200))
    pts = []
    outdir = _out(cfg, "portrait")
    for i in range(n_orbits):
        P0 = est.phase_point(float(rng.uniform(0, b.period)), float(rng.uniform(0.1, np.pi - 0.1)))
        orbit = est.orbit(P0, steps)
        mio.write_orbit_csv(outdir / f"orbit_{i:03d}.csv", orbit)
        pts.extend((P.s / b.period, P.theta / np.pi) for P in orbit)
    mio.atomic_write(_out(cfg, "portrait.svg"), mio.svg_points(np.array(pts)))
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser and entry point
# ---------------------------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file; flags override its fields")
    common.add_argument("--out", help="output directory (default: current directory)")
    common.add_argument("--seed", type=int, help="seed for randomized sampling")
    common.add_argument("--surface", choices=["sphere", "hyperbolic"])

    dyn = argparse.ArgumentParser(add_help=False)
    dyn.add_argument("--rho", type=float, help="geodesic radius of a circle boundary")
    dyn.add_argument("--a", type=float, help="ellipse semi-axis parameter a")
    dyn.add_argument("--b", type=float, help="ellipse semi-axis parameter b")
    dyn.add_argument("--points", help="CSV of ordered boundary points (sampled curve)")
    dyn.add_argument("--beta", type=float)
    dyn.add_argument("--r", type=float, help="Larmor radius")
    dyn.add_argument("--strict", action="store_true", default=None,
                     help="refuse (exit 2) when beta is not below the minimal curvature")
    dyn.add_argument("--svg", action="store_true", default=None, help="also emit an SVG drawing")

    p = argparse.ArgumentParser(prog="magbilliard", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("simulate", parents=[common, dyn], help="iterate the billiard map")
    sp.add_argument("--steps", type=int)
    sp.add_argument("--s0", type=float)
    sp.add_argument("--theta0", type=float)
    sp.add_argument("--n-grid", dest="n_grid", type=int)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("fronts", parents=[common, dyn], help="parallel curves and their cusps")
    sp.add_argument("--t", type=float, nargs="+", help="offsets (default: +r and -r)")
    sp.add_argument("--n", type=int)
    sp.set_defaults(func=cmd_fronts)

    sp = sub.add_parser("curvature", parents=[common, dyn], help="boundary curvature profile")
    sp.add_argument("--n", type=int)
    sp.set_defaults(func=cmd_curvature)

    sp = sub.add_parser("remarkable", parents=[common, dyn], help="constancy of the remarkable quantity")
    sp.add_argument("--poly", help="polynomial JSON, or 'round' / 'appendix'")
    sp.add_argument("--n", type=int)
    sp.set_defaults(func=cmd_remarkable)

    sp = sub.add_parser("ellipse-verify", parents=[common], help="check the explicit octic and its singular points")
    sp.add_argument("--a", type=float)
    sp.add_argument("--b", type=float)
    sp.add_argument("--d", type=float)
    sp.add_argument("--sweep", action="store_true", default=None, help="scan d over 0.05..0.95")
    sp.add_argument("--n-seeds", dest="n_seeds", type=int)
    sp.set_defaults(func=cmd_ellipse_verify)

    sp = sub.add_parser("polyfit", parents=[common, dyn], help="least-squares polynomial on the phase space")
    sp.add_argument("--degree", type=int)
    sp.add_argument("--function", help="built-in: x1, x3, exp_x1 or random:N")
    sp.add_argument("--values", help="CSV with columns x1,x2,x3,value")
    sp.set_defaults(func=cmd_polyfit)

    sp = sub.add_parser("phase-portrait", parents=[common, dyn], help="several orbits in chord coordinates")
    sp.add_argument("--orbits", type=int)
    sp.add_argument("--steps", type=int)
    sp.set_defaults(func=cmd_phase_portrait)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args)
        return args.func(cfg)
    except NotAdmissible as err:
        print(f"inadmissible: {err}", file=sys.stderr)
        return EXIT_INADMISSIBLE
    except SingularPoint as err:
        print(f"singular point: {err}", file=sys.stderr)
        return EXIT_SINGULAR
    except SolverError as err:
        print(f"solver failure: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_SOLVER
    except (ConfigError, ValueError, KeyError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
