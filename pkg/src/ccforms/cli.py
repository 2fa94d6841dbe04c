"""Command line: ccforms geodesic|surface|stability|verify --config FILE [--out-dir DIR]."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .errors import (CCFormsError, ConfigError, DomainError, InputError, IntegrationError,
                     QuadratureError)
from .export import csv_text, json_text, obj_text, stereographic, write_text
from .geodesics import closed_form_geodesic, geodesic_flow
from .geometry import frame_data, numeric_mean_curvature
from .model_space import covariant_term, j_rotate, to_frame
from .stability import classify, jacobi_operator
from .surfaces import Helicoid, immersion_status
from .verify import check, index_form_checks, run_verify, stability_dict
from .config import load_config

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
FLAG_TOL = 1e-9

VERTEX_FIELDS = ("eps", "s", "{coords}", "abs_N_h", "N_T", "H_numeric", "q", "L_abs_N_h", "singular", "vertical")


def coord_names(kappa):
    return ("x1", "y1", "x2", "y2") if kappa == 1 else ("x", "y", "t")


def vertex_header(kappa):
    out = []
    for f in VERTEX_FIELDS:
        out += list(coord_names(kappa)) if f == "{coords}" else [f]
    return out


# commands ----------------------------------------------------------------------

def cmd_geodesic(cfg, out_dir):
    if cfg.geodesic is None:
        raise ConfigError("geodesic: section missing")
    spec = cfg.geodesic_spec()
    g = cfg.geodesic
    s = np.linspace(*g.s_range, g.n)
    res = geodesic_flow(spec.sf, spec.base[None], spec.initial_velocity[None], spec.lam, s, cfg.tolerances.ode)
    pos, vel = res.position[0], res.velocity[0]
    header = ["s"] + list(coord_names(cfg.kappa)) + ["a", "b", "c"]
    rows = [[si, *p, *w] for si, p, w in zip(s, pos, vel)]
    write_text(out_dir / cfg.outputs.polyline, csv_text(header, rows))

    # residuals from position differences, independent of the integrated velocity
    h = 1e-3
    sh = np.concatenate([s + k * h for k in (-2, -1, 1, 2)])
    r2 = geodesic_flow(spec.sf, spec.base[None], spec.initial_velocity[None], spec.lam, sh, cfg.tolerances.ode)
    m = len(s)
    P = [r2.position[0, i * m:(i + 1) * m] for i in range(4)]
    dp = (P[0] - 8 * P[1] + 8 * P[2] - P[3]) / (12 * h)
    comps = to_frame(spec.sf, pos, dp)
    checks = [check("unit-speed", "|gamma'| = 1", np.max(np.abs(np.linalg.norm(comps, axis=-1) - 1)), 1e-8),
              check("horizontality", "<gamma', T> = 0", np.max(np.abs(comps[:, 2])), 1e-8)]
    W = [r2.velocity[0, i * m:(i + 1) * m] for i in range(4)]
    acc = (W[0] - 8 * W[1] + 8 * W[2] - W[3]) / (12 * h) + covariant_term(spec.sf, vel, vel)
    kap = -0.5 * np.sum(acc * j_rotate(vel), axis=-1)
    checks.append(check("curvature", "CC-curvature equals lambda", np.max(np.abs(kap - spec.lam)), 1e-6))
    if cfg.kappa == 1:
        checks.append(check("sphere-norm", "positions on the unit 3-sphere",
                            np.max(np.abs(np.linalg.norm(pos, axis=-1) - 1)), 1e-10))
    cf = [closed_form_geodesic(spec, si) for si in s]
    if all(c is not None for c in cf):
        ref = np.array([c.position for c in cf])
        checks.append(check("closed-form", "matches the closed-form geodesic", np.max(np.abs(ref - pos)), 1e-7))
    report = {"command": "geodesic", "kappa": cfg.kappa, "lambda": spec.lam, "n_samples": len(s),
              "steps": res.steps, "renormalizations": res.renormalizations, "checks": checks,
              "passed": all(c["passed"] for c in checks)}
    write_text(out_dir / cfg.outputs.report, json_text(report))
    return report


def require_immersed(surf, window):
    if isinstance(surf, Helicoid):
        st = immersion_status(surf, window.eps_range)
        if not st.immersed:
            raise ConfigError(f"surface is not immersed on the window: {st.condition}")


def vertex_records(surf, window, tol):
    e = np.linspace(*window.eps_range, window.n_eps)
    s = np.linspace(*window.s_range, window.n_s)
    pos, vel = surf.grid(e, s, tol=tol)
    E, S = np.meshgrid(e, s, indexing="ij")
    with np.errstate(all="ignore"):
        fd = frame_data(surf, E, S, strict=False)
        H = numeric_mean_curvature(surf, e, s, tol=min(tol, 1e-12))
        L = jacobi_operator(surf, "nh", E, S, fd)
    v, vp = fd.vj[0], fd.vj[1]
    D = np.sqrt(4 * v * v + vp * vp)
    singular = np.abs(v) <= FLAG_TOL * np.maximum(1.0, D)
    vertical = ~singular & (np.abs(vp) <= FLAG_TOL * D)
    # on the singular set N is vertical: |N_h| = 0, the rest is undefined
    nh = np.where(singular, 0.0, fd.nh)
    nt, q, H, L = (np.where(singular, np.nan, x) for x in (fd.nt, fd.q, H, L))
    rows = []
    for i in range(len(e)):
        for j in range(len(s)):
            rows.append([E[i, j], S[i, j], *pos[i, j], nh[i, j], nt[i, j], H[i, j], q[i, j], L[i, j],
                         bool(singular[i, j]), bool(vertical[i, j])])
    return pos, rows


def cmd_surface(cfg, out_dir):
    surf = cfg.build_surface()
    window = cfg.window(surf)
    require_immersed(surf, window)
    pos, rows = vertex_records(surf, window, cfg.tolerances.ode)
    if cfg.kappa == 1:
        verts = stereographic(pos) if cfg.projection == "stereographic" else pos[..., 1:]
        note = "stereographic projection from (-1,0,0,0)" if cfg.projection == "stereographic" else \
            "raw coordinates (y1, x2, y2); full 4D coordinates are in the CSV"
    else:
        verts, note = pos, "coordinates (x, y, t)"
    write_text(out_dir / cfg.outputs.mesh, obj_text(verts, window.n_eps, window.n_s, f"ccforms {surf.kind}; {note}"))
    write_text(out_dir / cfg.outputs.csv, csv_text(vertex_header(cfg.kappa), rows))
    n_sing = sum(1 for r in rows if r[-2])
    report = {"command": "surface", "surface": cfg.surface["type"], "kappa": cfg.kappa, "lambda": surf.lam,
              "n_vertices": len(rows), "n_singular": n_sing, "n_vertical": sum(1 for r in rows if r[-1]),
              "passed": True}
    write_text(out_dir / cfg.outputs.report, json_text(report))
    return report


def cmd_stability(cfg, out_dir):
    surf = cfg.build_surface()
    window = cfg.window(surf)
    require_immersed(surf, window)
    rep = classify(surf, window)
    rng = np.random.default_rng(cfg.seed)
    checks = index_form_checks(surf, window, rng, cfg.n_test_functions, rep.classification)
    report = {"command": "stability", "surface": cfg.surface["type"], "kappa": cfg.kappa, "lambda": surf.lam,
              **stability_dict(rep), "checks": checks, "passed": all(c["passed"] for c in checks)}
    write_text(out_dir / cfg.outputs.report, json_text(report))
    return report


def cmd_verify(cfg, out_dir):
    report = {"command": "verify", **run_verify(cfg)}
    write_text(out_dir / cfg.outputs.report, json_text(report))
    return report


COMMANDS = {"geodesic": cmd_geodesic, "surface": cmd_surface, "stability": cmd_stability, "verify": cmd_verify}


def summary_lines(report):
    lines = []
    for c in report.get("checks", []):
        flag = "PASS" if c["passed"] else "FAIL"
        lines.append(f"{flag} {c['name']}: residual {c['residual']:.3e} (tol {c['tolerance']:.1e})")
    if "classification" in report:
        lines.append(f"classification: {report['classification']}")
    return lines


def main(argv=None):
    ap = argparse.ArgumentParser(prog="ccforms", description=__doc__)
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", required=True)
    ap.add_argument("--out-dir", default=".")
    ap.add_argument("--quiet", action="store_true")
    args = ap.parse_args(argv)
    try:
        cfg = load_config(args.config)
        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        report = COMMANDS[args.command](cfg, out_dir)
    except ConfigError as exc:
        print(f"ccforms: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InputError as exc:
        print(f"ccforms: input error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IntegrationError, QuadratureError, DomainError, CCFormsError) as exc:
        print(f"ccforms: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if not args.quiet:
        for line in summary_lines(report):
            print(line)
    return EXIT_OK if report.get("passed", True) else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
