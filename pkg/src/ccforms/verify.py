"""End-to-end verification suite for one configured surface.

Each check is a dict {name, anchor, residual, tolerance, passed}; the
anchor names the identity being checked.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import InputError
from .geodesics import curvature_of_flow
from .geometry import (derivative_identities, from_moving, frame_data,
                       numeric_mean_curvature)
from .jacobi import jacobi_vector, numeric_jacobi
from .model_space import to_frame
from .stability import (STRICT, STRONG, classify, index_form, index_form_sorpasso,
                        jacobi_operator, plane_identity_suite, random_rect, TestFunction, WitnessFunction,
                        check_support, COLLAR)
from .surfaces import Helicoid, PolePlane, Sphere, Strip, immersion_status, locate_singular_vertical, strip_first_zero

FD_H = 1e-3


def check(name, anchor, residual, tolerance):
    residual = float(residual)
    return {"name": name, "anchor": anchor, "residual": residual, "tolerance": float(tolerance),
            "passed": bool(residual <= tolerance)}


def _regular_grid(surf, window, collar=COLLAR):
    E, S = window.points()
    v = surf.vjet(E, S, 0)[0]
    keep = np.abs(v) > collar
    return E[keep], S[keep]


def is_vertical_surface(surf):
    if isinstance(surf, Helicoid):
        return surf.angle.kind == "linear" and immersion_status(surf, (-1.0, 1.0), n=5).vertical_surface
    return False


# individual suites ---------------------------------------------------------

def geodesic_invariants(surf, window, tol):
    """Unit speed and horizontality of the characteristic curves from differences of positions."""
    e = np.linspace(*window.eps_range, min(window.n_eps, 11))
    s = np.linspace(*window.s_range, min(window.n_s, 21))
    offs = [-2, -1, 0, 1, 2]
    S = np.concatenate([s + k * FD_H for k in offs])
    pos, vel = surf.grid(e, S, tol=tol.ode, shared=True)
    m = len(s)
    P = [pos[:, i * m:(i + 1) * m] for i in range(5)]
    dp = (P[0] - 8 * P[1] + 8 * P[3] - P[4]) / (12 * FD_H)
    comps = to_frame(surf.sf, P[2], dp)
    speed = np.max(np.abs(np.linalg.norm(comps, axis=-1) - 1))
    horiz = np.max(np.abs(comps[..., 2]))
    out = [check("unit-speed", "characteristic curves are unit-speed", speed, 1e-8),
           check("horizontality", "characteristic curves are horizontal", horiz, 1e-8)]
    if surf.sf.kappa == 1:
        out.append(check("sphere-norm", "positions stay on the unit 3-sphere",
                         np.max(np.abs(np.linalg.norm(P[2], axis=-1) - 1)), 1e-10))
    return out


def jacobi_oracle(surf, window, rng, n, tol):
    E, S = _regular_grid(surf, window)
    if n == 0 or len(E) == 0:
        return []
    e = rng.uniform(*window.eps_range, n)
    s = rng.uniform(*window.s_range, n)
    keep = np.abs(surf.vjet(e, s, 0)[0]) > COLLAR
    e, s = e[keep], s[keep]
    num = numeric_jacobi(surf.sf, lambda a, b: surf.flow(a, b, tol.ode), e, s)
    exact = jacobi_vector(surf.jacobi_field(e), s)
    return [check("jacobi-field", "variation field equals the closed-form Jacobi field",
                  np.max(np.abs(num - exact)), 1e-6)]


def mean_curvature_check(surf, window, tol):
    e = np.linspace(*window.eps_range, window.n_eps)
    s = np.linspace(*window.s_range, window.n_s)
    with np.errstate(invalid="ignore", divide="ignore"):  # singular points are masked below
        H = numeric_mean_curvature(surf, e, s, tol=min(tol.ode, 1e-12))
    E, S = np.meshgrid(e, s, indexing="ij")
    ok = np.abs(surf.vjet(E, S, 0)[0]) > COLLAR
    err = np.abs(H[ok] - surf.lam)
    return [check("mean-curvature-mean", "numeric H from D_Z Z equals lambda (mean)", np.mean(err), 1e-6),
            check("mean-curvature-max", "numeric H from D_Z Z equals lambda (max)", np.max(err), 1e-5)]


def frame_checks(surf, window, tol):
    e, s = _regular_grid(surf, window)
    pos, vel = surf.flow(e, s, tol.ode)
    fd = frame_data(surf, e, s, velocity=vel)
    F = fd.frame
    gram_err = 0.0
    for a, b in (("N", "N"), ("Z", "Z"), ("S", "S"), ("nu_h", "nu_h"), ("N", "Z"), ("N", "S"), ("Z", "S"),
                 ("Z", "nu_h")):
        want = 1.0 if a == b else 0.0
        gram_err = max(gram_err, float(np.max(np.abs(np.sum(F[a] * F[b], axis=-1) - want))))
    Nh = F["N"].copy()
    Nh[..., 2] = 0
    rel = np.max(np.abs(Nh - fd.nh[:, None] * F["nu_h"]))
    nt = np.max(np.abs(F["N"][..., 2] - fd.nt))
    unit = np.max(np.abs(fd.nh ** 2 + fd.nt ** 2 - 1))
    jz = np.stack([-F["nu_h"][..., 1], F["nu_h"][..., 0], 0 * F["nu_h"][..., 0]], axis=-1)
    zrel = np.max(np.abs(jz - F["Z"]))
    r1, r2 = derivative_identities(surf, e, s)
    # B(Z) + S = bzz Z + (1 + bzs) S, evaluated as a vector
    BZS = fd.bzz[:, None] * F["Z"] + (1 + fd.bzs)[:, None] * F["S"]
    qvec = np.sum(BZS * BZS, axis=-1) + 4 * (surf.sf.kappa - 1) * fd.nh ** 2
    return [check("frame-orthonormality", "{N, Z, S} and nu_h are orthonormal", gram_err, 1e-10),
            check("normal-decomposition", "N = |N_h| nu_h + <N,T> T", max(rel, nt, unit), 1e-10),
            check("characteristic-direction", "Z = J(nu_h)", zrel, 1e-10),
            check("derivative-identities", "Z|N_h| and Z<N,T> in terms of <B(Z),S>",
                  max(np.max(np.abs(r1)), np.max(np.abs(r2))), 1e-7),
            check("q-decomposition", "q = |B(Z)+S|^2 + 4(K-1)|N_h|^2", np.max(np.abs(qvec - fd.q)), 1e-8)]


def reeb_jacobi(surf, window):
    e, s = _regular_grid(surf, window)
    L = jacobi_operator(surf, "nt", e, s)
    return [check("reeb-jacobi", "<N,T> is a Jacobi function", np.max(np.abs(L)), 1e-5)]


def master_identities(surf, window, tol):
    e, s = _regular_grid(surf, window)
    vj = surf.vjet(e, s, 3)
    v2L = vj[0] ** 2 * jacobi_operator(surf, "nh", e, s)
    vc = surf.vertical(e)
    num = vc.numerator()
    out = [check("master-identity", "v^2 L(|N_h|) = 2 v v'' - v'^2 + tau v^2 (constant along curves)",
                 np.max(np.abs(v2L - num)), tol.identity)]
    # constancy of the numerator along characteristic curves
    n_s = 2 * vj[0] * vj[2] - vj[1] ** 2 + surf.tau() * vj[0] ** 2
    scale = np.maximum(1.0, np.maximum(np.abs(2 * vj[0] * vj[2]), vj[1] ** 2))
    out.append(check("numerator-constancy", "2 v v'' - v'^2 + tau v^2 is constant in s",
                     np.max(np.abs(n_s - num) / scale), 1e-10))
    if isinstance(surf, Helicoid) and surf.sf.kappa == -1:
        tp = surf.theta(e, 1)
        out.append(check("helicoid-identity", "v^2 L(|N_h|) = 4(theta' + lambda^2 - 1)",
                         np.max(np.abs(v2L - 4 * (tp + surf.lam ** 2 - 1))), tol.identity))
    if isinstance(surf, Strip):
        out.append(check("strip-identity", "v^2 L(|N_h|) = -4 on strips", np.max(np.abs(v2L + 4)), tol.identity))
    if is_vertical_surface(surf):
        L = jacobi_operator(surf, "nh", e, s)
        out.append(check("vertical-identity", "L(|N_h|) = 4(H^2 + kappa) on vertical surfaces",
                         np.max(np.abs(L - 4 * (surf.lam ** 2 + surf.sf.kappa))), tol.identity))
    return out


def helicoid_checks(surf, window, tol):
    out = []
    st = immersion_status(surf, window.eps_range)
    out.append(check("immersion", st.condition, 0.0 if st.immersed else 1.0, 0.5))
    e = np.linspace(*window.eps_range, min(window.n_eps, 11))
    s = np.linspace(*window.s_range, min(window.n_s, 11))
    if surf.lam == 0 and surf.sf.kappa in (0, -1):
        pos, _ = surf.grid(e, s, tol=tol.ode)
        x, y, t = pos[..., 0], pos[..., 1], pos[..., 2]
        ang = surf.sigma(t) if surf.sf.kappa == 0 else surf.theta(t)
        out.append(check("implicit-equation", "x sin(angle(t)) - y cos(angle(t)) = 0",
                         np.max(np.abs(x * np.sin(ang) - y * np.cos(ang))), 1e-8))
    tau = surf.tau()
    if tau > 0:
        k = math.sqrt(tau)
        worst = 0.0
        for eps in e:
            vc = surf.vertical(float(eps))
            if abs(float(vc.v0pp)) < 1e-12:
                continue
            _, vert = locate_singular_vertical(surf, eps, (0.5 * math.pi / k, 3.5 * math.pi / k))
            for r in vert:
                worst = max(worst, abs(r - round(r * k / math.pi) * math.pi / k))
        out.append(check("vertical-points", "vertical points at s = m pi / sqrt(tau)", worst, 1e-10))
    return out


def plane_checks(surf, tol):
    r = plane_identity_suite(surf)
    return [check("plane-nt-positive", "<N,T> > 0 on the regular set", 0.0 if r["nt_min"] > 0 else 1.0, 0.5),
            check("plane-bzs", "<B(Z),S> = (1 + mu^2)|N_h|^2 form", r["bzs"], 1e-7),
            check("plane-q", "q = (1 - c|N_h|^2)^2", r["q"], 1e-7),
            check("plane-bss", "<B(S),S> closed form", r["bss"], 1e-7),
            check("plane-density", "|N_h|^-1 da closed form", r["density"], 1e-7),
            check("disc-integral", "integral of |N_h|^-1 da over a disc", r["disc_rel_error"], 1e-8)]


def sphere_checks(surf, tol):
    tau = surf.tau()
    end = 2 * math.pi / math.sqrt(tau)
    sing, _ = locate_singular_vertical(surf, 0.0, (0.5 * end, 1.5 * end))
    err = min((abs(r - end) for r in sing), default=math.inf)
    th = np.linspace(0, 2 * math.pi, 8, endpoint=False)
    pos, _ = surf.grid(th, [end], tol=tol.ode)
    spread = np.max(np.linalg.norm(pos[:, 0] - pos[0, 0], axis=-1))
    return [check("second-pole", "v vanishes at s = 2 pi / sqrt(tau)", err, 1e-10),
            check("second-pole-closure", "all curves meet at the second pole", spread, 1e-7)]


def strip_checks(surf, tol):
    out = []
    ref = strip_first_zero(surf.tau(), surf.mu)
    if math.isinf(ref) and math.isinf(surf.s0):
        return [check("strip-first-zero", "first zero of v", 0.0, 1e-10)]
    if math.isinf(ref) != math.isinf(surf.s0):
        return [check("strip-first-zero", "first zero of v", math.inf, 1e-10)]
    out.append(check("strip-first-zero", "first zero of v", abs(ref - surf.s0), 1e-10))
    s0 = surf.s0
    vc = surf.vertical(0.0)
    out.append(check("strip-vprime", "v'(s0) = 2", abs(vc.derivs(s0, 1)[1] - 2), 1e-8))
    e = np.linspace(-0.5, 0.5, 7)
    num = numeric_jacobi(surf.sf, lambda a, b: surf.flow(a, b, 1e-12), e, np.full(len(e), s0))
    # Gamma_0'(eps) = J(gamma'_eps(s0)) in the moving basis is (0, 1, 0)
    out.append(check("strip-orthogonality", "Gamma_0' = J(gamma') at the singular curve",
                     np.max(np.abs(num - np.array([0.0, 1.0, 0.0]))), 1e-5))
    h = 0.01
    eg = np.arange(-10, 11) * h
    pos, vel = surf.flow(eg, np.full(len(eg), s0), 1e-12)
    tang = from_moving(vel, jacobi_vector(surf.jacobi_field(eg), np.full(len(eg), s0)))
    tang = tang / np.linalg.norm(tang, axis=-1, keepdims=True)
    kap = curvature_of_flow(surf.sf, eg, tang)
    out.append(check("singular-curve-curvature", "Gamma_0 is a geodesic of curvature mu", abs(kap - surf.mu), 1e-5))
    return out


def index_form_checks(surf, window, rng, n, classification):
    if n == 0:
        return []
    rect_w = (*window.eps_range, *window.s_range)
    if isinstance(surf, PolePlane):
        lo = max(window.s_range[0], 0.05)
        rect_w = (*window.eps_range, lo, window.s_range[1])
    diffs, values = [], []
    tries = 0
    while len(values) < n and tries < 20 * n:
        tries += 1
        rect = random_rect(rng, rect_w)
        try:
            check_support(surf, rect)
        except InputError:
            continue
        w = TestFunction.random(rng, rect)
        q1 = index_form(surf, w)
        q2 = index_form_sorpasso(surf, w, "nh")
        diffs.append(abs(q1 - q2) / max(abs(q1), 1e-300))
        values.append(q1)
    if not values:
        return [check("index-form-consistency", "no admissible supports found", math.inf, 1e-5)]
    out = [check("index-form-consistency", "Q(w,w) equals its rewriting with f = w/|N_h|", max(diffs), 1e-5)]
    stable = classification in (STRICT, STRONG) or (isinstance(surf, PolePlane) and not isinstance(surf, Sphere))
    if isinstance(surf, PolePlane) and not isinstance(surf, Sphere):
        # <N,T> is a Jacobi function, so Q(u, <N,T>) vanishes for u supported off the pole
        worst = 0.0
        for _ in range(min(n, 5)):
            rect = random_rect(rng, rect_w)
            u = TestFunction.random(rng, rect)
            qn = index_form(surf, u, WitnessFunction(surf, "nt", rect))
            qa = index_form(surf, u)
            worst = max(worst, abs(qn) / max(abs(qa), 1.0))
        out.append(check("jacobi-orthogonality", "Q(u, <N,T>) = 0 for u supported off the pole", worst, 1e-6))
    if stable:
        out.append(check("index-form-positivity", "Q(w,w) > 0 for nonzero test functions",
                         0.0 if min(values) > 0 else 1.0, 0.5))
    return out


# driver ----------------------------------------------------------------------

def run_verify(cfg, surf=None):
    surf = surf if surf is not None else cfg.build_surface()
    window = cfg.window(surf)
    rng = np.random.default_rng(cfg.seed)
    tol = cfg.tolerances
    checks = []
    checks += geodesic_invariants(surf, window, tol)
    checks += jacobi_oracle(surf, window, rng, cfg.n_jacobi_points, tol)
    checks += mean_curvature_check(surf, window, tol)
    checks += frame_checks(surf, window, tol)
    checks += reeb_jacobi(surf, window)
    checks += master_identities(surf, window, tol)
    if isinstance(surf, Helicoid):
        checks += helicoid_checks(surf, window, tol)
    elif isinstance(surf, Sphere):
        checks += sphere_checks(surf, tol)
    elif isinstance(surf, PolePlane):
        checks += plane_checks(surf, tol)
    elif isinstance(surf, Strip):
        checks += strip_checks(surf, tol)
    rep = classify(surf, window)
    checks += index_form_checks(surf, window, rng, cfg.n_test_functions, rep.classification)
    report = {
        "surface": {"type": cfg.surface["type"], "kappa": surf.sf.kappa, "lambda": surf.lam, "tau": surf.tau()},
        "window": {"eps_range": list(window.eps_range), "s_range": list(window.s_range),
                   "n_eps": window.n_eps, "n_s": window.n_s},
        "classification": rep.classification,
        "criterion": rep.criterion,
        "stability": stability_dict(rep),
        "checks": checks,
        "passed": all(c["passed"] for c in checks),
    }
    return report


def stability_dict(rep):
    return {"classification": rep.classification, "criterion": rep.criterion,
            "q_range": list(rep.q_range), "l_nh_range": list(rep.l_nh_range),
            "nt_range": list(rep.nt_range), "reeb_jacobi_residual": rep.reeb_jacobi_residual,
            "witnesses": rep.witnesses, "n_points": rep.n_points, "n_excluded": rep.n_excluded}
