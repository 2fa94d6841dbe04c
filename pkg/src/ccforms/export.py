"""OBJ, CSV and JSON writers with fixed formatting (17 significant digits, LF)."""
from __future__ import annotations

import json
import math

import numpy as np


def fmt(x):
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.17g}"


def stereographic(p):
    """Projection of S^3 from (-1, 0, 0, 0) onto R^3."""
    p = np.asarray(p, dtype=float)
    d = 1.0 + p[..., 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        return p[..., 1:] / d[..., None]


def obj_text(vertices, n_eps, n_s, comment=None):
    """Quad grid (n_eps x n_s, row-major in eps) split into triangles."""
    vertices = np.asarray(vertices, dtype=float).reshape(n_eps * n_s, 3)
    ok = np.all(np.isfinite(vertices), axis=1)
    lines = [f"# {comment}"] if comment else []
    for v, good in zip(vertices, ok):
        lines.append("v " + " ".join(fmt(c) for c in (v if good else np.zeros(3))))
    for i in range(n_eps - 1):
        for j in range(n_s - 1):
            a = i * n_s + j
            b, c, d = a + 1, a + n_s, a + n_s + 1
            for tri in ((a, c, b), (b, c, d)):
                if all(ok[k] for k in tri):
                    lines.append("f " + " ".join(str(k + 1) for k in tri))
    return "\n".join(lines) + "\n"


def csv_text(header, rows):
    out = [",".join(header)]
    for r in rows:
        out.append(",".join(str(int(x)) if isinstance(x, (bool, np.bool_)) else fmt(x) for x in r))
    return "\n".join(out) + "\n"


def _clean(o):
    if isinstance(o, dict):
        return {str(k): _clean(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_clean(v) for v in o]
    if isinstance(o, (bool, np.bool_)):
        return bool(o)
    if isinstance(o, (int, np.integer)):
        return int(o)
    if isinstance(o, (float, np.floating)):
        x = float(o)
        return x if math.isfinite(x) else fmt(x)
    if isinstance(o, np.ndarray):
        return _clean(o.tolist())
    return o


def json_text(obj):
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


def write_text(path, text):
    with open(path, "w", newline="\n") as fh:
        fh.write(text)
