"""CSV, JSON and SVG emission with lossless float formatting."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .billiard import PhasePoint
from .geometry import Surface

ORBIT_HEADER = ["step", "s", "theta", "cx", "cy", "cz"]
FRONT_HEADER = ["s", "t", "px", "py", "pz", "curvature", "singular"]


def fmt(x):
    """17 significant digits: a double survives the text round trip."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def atomic_write(path, text):
    """Write ``text`` to ``path`` by rename, so readers never see a partial file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def orbit_csv(points):
    rows = []
    for i, P in enumerate(points):
        c = np.asarray(P.center, dtype=float)
        rows.append((i, P.s, P.theta, c[0], c[1], c[2]))
    return csv_text(ORBIT_HEADER, rows)


def write_orbit_csv(path, points):
    atomic_write(path, orbit_csv(points))


def _opt_float(v):
    return None if v == "" else float(v)


def read_orbit_csv(path_or_text):
    text = _read_text(path_or_text)
    rd = csv.DictReader(io.StringIO(text))
    if rd.fieldnames != ORBIT_HEADER:
        raise ValueError(f"unexpected orbit header {rd.fieldnames}")
    out = []
    for row in rd:
        c = np.array([float(row["cx"]), float(row["cy"]), float(row["cz"])])
        out.append(PhasePoint(c, _opt_float(row["s"]), _opt_float(row["theta"])))
    return out


def front_csv(samples):
    rows = []
    for fs in samples:
        rows.extend(fs.rows())
    return csv_text(FRONT_HEADER, rows)


def write_front_csv(path, samples):
    atomic_write(path, front_csv(samples))


def read_front_csv(path_or_text):
    """Rows as a dict of numpy columns."""
    text = _read_text(path_or_text)
    rd = csv.DictReader(io.StringIO(text))
    if rd.fieldnames != FRONT_HEADER:
        raise ValueError(f"unexpected front header {rd.fieldnames}")
    cols = {k: [] for k in FRONT_HEADER}
    for row in rd:
        for k in FRONT_HEADER:
            cols[k].append(row[k])
    out = {k: np.array([float(v) for v in cols[k]]) for k in FRONT_HEADER if k != "singular"}
    out["singular"] = np.array([v == "1" for v in cols["singular"]])
    return out


def read_points_csv(path_or_text):
    """Ordered points, three numeric columns; a non-numeric first row is taken as a header."""
    text = _read_text(path_or_text)
    rows = [r for r in csv.reader(io.StringIO(text)) if r]
    try:
        [float(v) for v in rows[0]]
    except ValueError:
        rows = rows[1:]
    return np.array([[float(v) for v in r] for r in rows])


def _read_text(path_or_text):
    if isinstance(path_or_text, Path) or (isinstance(path_or_text, str) and "\n" not in path_or_text
                                          and os.path.exists(path_or_text)):
        return Path(path_or_text).read_text()
    return path_or_text


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if np.isfinite(v) else None
    if isinstance(obj, Surface):
        return obj.label
    return obj


def json_text(doc):
    """Deterministic JSON; floats use the shortest repr that round-trips."""
    return json.dumps(_jsonable(doc), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path, doc):
    atomic_write(path, json_text(doc))


# ---------------------------------------------------------------------------
# SVG
# ---------------------------------------------------------------------------


def project(kind, x):
    """Orthographic view of the sphere from +x3, Poincare disc for the hyperboloid."""
    x = np.asarray(x, dtype=float)
    if Surface.parse(kind) is Surface.HYPERBOLIC:
        return x[..., :2] / (1.0 + x[..., 2:3])
    return x[..., :2]


def svg_polylines(polylines, size=600, margin=20, stroke=("black", "#c0392b", "#2471a3", "#229954")):
    """Polylines of planar points in the unit disc (or any bounded region), scaled to fit."""
    allp = np.concatenate([np.asarray(p, dtype=float).reshape(-1, 2) for p in polylines], axis=0)
    lo = allp.min(axis=0)
    hi = allp.max(axis=0)
    span = float(max(hi[0] - lo[0], hi[1] - lo[1], 1e-12))
    k = (size - 2 * margin) / span

    def to_px(p):
        # y axis flipped so that the picture keeps the orientation of the plane
        return margin + (p[:, 0] - lo[0]) * k, size - margin - (p[:, 1] - lo[1]) * k

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">']
    for i, pl in enumerate(polylines):
        pl = np.asarray(pl, dtype=float).reshape(-1, 2)
        X, Y = to_px(pl)
        pts = " ".join(f"{a:.3f},{b:.3f}" for a, b in zip(X, Y))
        col = stroke[i % len(stroke)]
        out.append(f'  <polyline fill="none" stroke="{col}" stroke-width="1" points="{pts}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def svg_points(points, size=600, margin=20, radius=1.2):
    p = np.asarray(points, dtype=float).reshape(-1, 2)
    lo, hi = p.min(axis=0), p.max(axis=0)
    span = np.maximum(hi - lo, 1e-12)
    X = margin + (p[:, 0] - lo[0]) / span[0] * (size - 2 * margin)
    Y = size - margin - (p[:, 1] - lo[1]) / span[1] * (size - 2 * margin)
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">']
    out.extend(f'  <circle cx="{a:.3f}" cy="{b:.3f}" r="{radius}"/>' for a, b in zip(X, Y))
    out.append("</svg>")
    return "\n".join(out) + "\n"


__all__ = [
    "ORBIT_HEADER",
    "FRONT_HEADER",
    "fmt",
    "atomic_write",
    "csv_text",
    "orbit_csv",
    "write_orbit_csv",
    "read_orbit_csv",
    "front_csv",
    "write_front_csv",
    "read_front_csv",
    "read_points_csv",
    "json_text",
    "write_json",
    "project",
    "svg_polylines",
    "svg_points",
]
