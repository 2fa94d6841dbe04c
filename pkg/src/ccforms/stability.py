"""Stability calculus on the flow surfaces: q, the Jacobi operator, index forms, classifiers."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .geometry import Jet, bss_values, frame_data, l_nh_closed_form, nh_nt_jets
from .quadrature import QuadSpec, integrate_rect
from .surfaces import Helicoid, PolePlane, Sphere, Strip

COLLAR = 1e-3
STENCIL_H = 1e-4

STRONG = "strongly stable"
STRICT = "strictly stable"
INCONCLUSIVE = "criterion-inconclusive"
UNSTABLE = "unstable-by-paper-citation"


def q_value(frame, entries, sf):
    nh = frame.nh
    return (2 * entries.H * nh) ** 2 + (1 + entries.bzs) ** 2 + 4 * (sf.kappa - 1) * nh ** 2


def _psi_jet(surf, psi, eps, s, vj):
    if isinstance(psi, str):
        nh, nt = nh_nt_jets(surf, vj)
        if psi == "nh":
            return nh
        if psi == "nt":
            return nt
        raise InputError(f"unknown witness {psi!r}; use 'nh', 'nt' or a callable")
    if callable(psi):
        h = STENCIL_H
        f = [np.asarray(psi(eps, s + k * h), dtype=float) for k in (-2, -1, 0, 1, 2)]
        d1 = (f[0] - 8 * f[1] + 8 * f[3] - f[4]) / (12 * h)
        d2 = (-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12 * h * h)
        return Jet(f[2], d1, d2)
    raise InputError("psi must be 'nh', 'nt' or a callable psi(eps, s)")


def jacobi_operator(surf, psi, eps, s, fd=None):
    """L(psi) = |N_h|^-1 { Z Z psi + 2 |N_h|^-1 <N,T> bzs Z psi + q psi }.

    Z-derivatives are s-derivatives (times the sign z, which squares away
    in the second-order term).
    """
    eps, s = np.broadcast_arrays(np.asarray(eps, dtype=float), np.asarray(s, dtype=float))
    fd = fd if fd is not None else frame_data(surf, eps, s)
    p = _psi_jet(surf, psi, eps, s, fd.vj)
    return (p.d2 + 2 * fd.nt * fd.bzs * fd.zsign * p.d1 / fd.nh + fd.q * p.d0) / fd.nh


def area_density(vj):
    """da = sqrt(v^2 + v'^2/4) deps ds."""
    return np.sqrt(vj[0] ** 2 + 0.25 * vj[1] ** 2)


# test functions --------------------------------------------------------------

@dataclass(frozen=True)
class TestFunction:
    """Bump A * g_e^k * g_s^k * M on rect = (e0, e1, s0, s1).

    g_e = (eps-e0)(e1-eps) and g_s = (s-s0)(s1-s), both scaled to peak 1; M is
    a polynomial in normalized coordinates with coefficients coeffs[i][j].
    """

    __test__ = False  # not a pytest class

    rect: tuple
    k: int = 3
    amplitude: float = 1.0
    coeffs: tuple = ((1.0,),)

    def __post_init__(self):
        e0, e1, s0, s1 = map(float, self.rect)
        if not (e0 < e1 and s0 < s1):
            raise InputError("test function rectangle must be non-degenerate")
        if self.k < 2:
            raise InputError("bump power must be >= 2 for C^1 smoothness")

    def _parts(self, eps, s):
        e0, e1, s0, s1 = self.rect
        he, hs = 0.5 * (e1 - e0), 0.5 * (s1 - s0)
        ge = (eps - e0) * (e1 - eps) / he ** 2
        gs = (s - s0) * (s1 - s) / hs ** 2
        dgs = (s1 + s0 - 2 * s) / hs ** 2
        ddgs = -2.0 / hs ** 2
        x = (eps - 0.5 * (e0 + e1)) / he
        y = (s - 0.5 * (s0 + s1)) / hs
        c = np.asarray(self.coeffs, dtype=float)
        M = np.zeros(np.broadcast(x, y).shape)
        My = np.zeros_like(M)
        Myy = np.zeros_like(M)
        for i in range(c.shape[0]):
            xi = x ** i
            for j in range(c.shape[1]):
                if c[i, j] == 0:
                    continue
                M = M + c[i, j] * xi * y ** j
                if j >= 1:
                    My = My + c[i, j] * xi * j * y ** (j - 1) / hs
                if j >= 2:
                    Myy = Myy + c[i, j] * xi * j * (j - 1) * y ** (j - 2) / hs ** 2
        return ge, gs, dgs, ddgs, M, My, Myy

    def jet(self, eps, s):
        """Jet in s: (w, w_s, w_ss)."""
        k = self.k
        ge, gs, dgs, ddgs, M, My, Myy = self._parts(eps, s)
        inside = (ge > 0) & (gs > 0)
        ge = np.where(inside, ge, 0.0)
        gs = np.where(inside, gs, 0.0)
        Bs = gs ** k
        dBs = k * gs ** (k - 1) * dgs
        ddBs = k * (k - 1) * gs ** (k - 2) * dgs ** 2 + k * gs ** (k - 1) * ddgs
        A = self.amplitude * ge ** k
        return Jet(A * Bs * M, A * (dBs * M + Bs * My), A * (ddBs * M + 2 * dBs * My + Bs * Myy))

    def __call__(self, eps, s):
        return self.jet(eps, s).d0

    def boundary_max(self, n=33):
        e0, e1, s0, s1 = self.rect
        t = np.linspace(0, 1, n)
        pts = [(e0 + 0 * t, s0 + (s1 - s0) * t), (e1 + 0 * t, s0 + (s1 - s0) * t),
               (e0 + (e1 - e0) * t, s0 + 0 * t), (e0 + (e1 - e0) * t, s1 + 0 * t)]
        return max(float(np.max(np.abs(self(e, s)))) for e, s in pts)

    @classmethod
    def random(cls, rng, rect, degree=2, k=None):
        coeffs = rng.uniform(-0.3, 0.3, size=(degree + 1, degree + 1))
        coeffs[0, 0] = 1.0
        k = int(rng.integers(2, 5)) if k is None else k
        return cls(tuple(map(float, rect)), k, float(rng.uniform(0.5, 2.0)), tuple(map(tuple, coeffs)))


@dataclass(frozen=True)
class WitnessFunction:
    """|N_h| or <N,T> restricted to rect, usable as the second slot of index_form."""

    surf: object
    psi: str
    rect: tuple

    def jet(self, eps, s):
        return _psi_jet(self.surf, self.psi, eps, s, self.surf.vjet(eps, s, 3))


def random_rect(rng, window, min_frac=0.2):
    e0, e1, s0, s1 = window
    out = []
    for a, b in ((e0, e1), (s0, s1)):
        length = rng.uniform(min_frac, 1.0) * (b - a)
        lo = rng.uniform(a, b - length)
        out += [lo, lo + length]
    return tuple(out)


def check_support(surf, rect, collar=COLLAR, n=65):
    e0, e1, s0, s1 = rect
    lo, hi = surf.s_domain()
    if s0 < lo - 1e-12 or s1 > hi + 1e-12:
        raise InputError(f"support s-range [{s0}, {s1}] leaves the domain [{lo}, {hi}]")
    E, S = np.meshgrid(np.linspace(e0, e1, n), np.linspace(s0, s1, n), indexing="ij")
    v = surf.vjet(E, S, 0)[0]
    if np.min(np.abs(v)) < collar:
        raise InputError(f"support meets the singular set collar (min |v| = {np.min(np.abs(v)):.3g} < {collar})")


# index forms ----------------------------------------------------------------

def _support(u, v=None):
    if v is None or v is u:
        return u.rect
    r = (max(u.rect[0], v.rect[0]), min(u.rect[1], v.rect[1]),
         max(u.rect[2], v.rect[2]), min(u.rect[3], v.rect[3]))
    return r if r[0] < r[1] and r[2] < r[3] else None


def index_form(surf, u, v=None, spec=None, collar=COLLAR):
    """Q(u, v) = int |N_h|^-1 { Z(u) Z(v) - q u v } da over the common support."""
    v = u if v is None else v
    rect = _support(u, v)
    if rect is None:
        return 0.0
    check_support(surf, rect, collar)

    def integrand(E, S):
        fd = frame_data(surf, E, S)
        ju, jv = u.jet(E, S), v.jet(E, S)
        return (ju.d1 * jv.d1 - fd.q * ju.d0 * jv.d0) / fd.nh * area_density(fd.vj)

    return integrate_rect(integrand, rect, spec).value


def index_form_sorpasso(surf, w, psi="nh", spec=None, collar=COLLAR):
    """Q(w, w) rewritten with f = w/psi: int |N_h|^-1 { psi^2 Z(f)^2 - |N_h| psi L(psi) f^2 } da."""
    rect = w.rect
    check_support(surf, rect, collar)
    e0, e1, s0, s1 = rect
    E, S = np.meshgrid(np.linspace(e0, e1, 65), np.linspace(s0, s1, 65), indexing="ij")
    p = _psi_jet(surf, psi, E, S, surf.vjet(E, S, 3)).d0
    if np.min(np.abs(p)) <= 1e-10 or np.min(p) * np.max(p) <= 0:
        raise InputError("psi vanishes on the support")

    def integrand(E, S):
        fd = frame_data(surf, E, S)
        P = _psi_jet(surf, psi, E, S, fd.vj)
        L = jacobi_operator(surf, psi, E, S, fd)
        jw = w.jet(E, S)
        f = jw.d0 / P.d0
        fs = (jw.d1 * P.d0 - jw.d0 * P.d1) / P.d0 ** 2
        return (P.d0 ** 2 * fs ** 2 - fd.nh * P.d0 * L * f * f) / fd.nh * area_density(fd.vj)

    return integrate_rect(integrand, rect, spec).value


def patch_area(surf, rect, spec=None):
    """Sub-Riemannian area int |N_h| da over a parameter rectangle."""

    def integrand(E, S):
        vj = surf.vjet(E, S, 1)
        return np.abs(vj[0])

    # |N_h| * sqrt(v^2 + v'^2/4) = |v|
    return integrate_rect(integrand, rect, spec).value


def area_element(surf, eps, s):
    return area_density(surf.vjet(eps, s, 1))


# classification ---------------------------------------------------------------

@dataclass
class Window:
    eps_range: tuple
    s_range: tuple
    n_eps: int = 21
    n_s: int = 21

    def __post_init__(self):
        if self.n_eps < 2 or self.n_s < 2:
            raise InputError("window counts must be >= 2")
        for a, b in (self.eps_range, self.s_range):
            if not (math.isfinite(a) and math.isfinite(b) and a <= b):
                raise InputError("window ranges must be finite and ordered")

    def points(self):
        e = np.linspace(*self.eps_range, self.n_eps)
        s = np.linspace(*self.s_range, self.n_s)
        return np.meshgrid(e, s, indexing="ij")


def default_window(surf):
    if isinstance(surf, Helicoid):
        return Window((-1.0, 1.0), (-2.0, 2.0))
    if isinstance(surf, Sphere):
        end = surf.s_domain()[1]
        return Window((0.0, 2 * math.pi), (0.05 * end, 0.95 * end))
    if isinstance(surf, PolePlane):
        return Window((0.0, 2 * math.pi), (0.1, 2.0))
    if isinstance(surf, Strip):
        end = min(surf.s0, 3.0)
        return Window((-1.0, 1.0), (0.05 * end, 0.95 * end))
    raise InputError("unknown surface")


@dataclass
class StabilityReport:
    classification: str
    criterion: str
    q_range: tuple
    l_nh_range: tuple
    nt_range: tuple
    reeb_jacobi_residual: float
    witnesses: dict = field(default_factory=dict)
    n_points: int = 0
    n_excluded: int = 0
    window: Window = None


def classify(surf, window=None, tol=1e-9, collar=COLLAR):
    """Stability verdict from sign criteria on the window grid, first match wins.

    1. <N,T> of one strict sign                      -> strongly stable
    2. L(|N_h|) <= 0 (strictly stable when < 0)      -> strongly / strictly stable
    3. vertical surface with H^2 + kappa > 0         -> unstable (known result)
    otherwise inconclusive.
    """
    window = window or default_window(surf)
    E, S = window.points()
    v = surf.vjet(E, S, 0)[0]
    keep = np.abs(v) > collar
    if not np.any(keep):
        raise InputError("window contains no regular points outside the collar")
    e, s = E[keep], S[keep]
    fd = frame_data(surf, e, s)
    L = jacobi_operator(surf, "nh", e, s, fd)
    Lnt = jacobi_operator(surf, "nt", e, s, fd)

    def rng_(x):
        return (float(np.min(x)), float(np.max(x)))

    def at(i):
        return [float(e[i]), float(s[i])]

    wit = {"l_nh_max": at(int(np.argmax(L))), "l_nh_min": at(int(np.argmin(L))),
           "q_min": at(int(np.argmin(fd.q))), "q_max": at(int(np.argmax(fd.q))),
           "nt_min": at(int(np.argmin(fd.nt))), "nt_max": at(int(np.argmax(fd.nt))),
           "reeb_max": at(int(np.argmax(np.abs(Lnt))))}
    nt_lo, nt_hi = rng_(fd.nt)
    L_lo, L_hi = rng_(L)
    if nt_lo > tol or nt_hi < -tol:
        cls_, crit = STRONG, "<N,T> has a strict sign (nowhere vanishing Jacobi function <N,T>)"
    elif L_hi <= tol:
        if L_hi < -tol:
            cls_, crit = STRICT, "L(|N_h|) < 0 on the regular set"
        else:
            cls_, crit = STRONG, "L(|N_h|) <= 0 on the regular set"
    elif max(abs(nt_lo), abs(nt_hi)) <= tol and surf.lam ** 2 + surf.sf.kappa > 0:
        cls_, crit = UNSTABLE, "vertical surface with H^2 + kappa > 0 (known instability result)"
    else:
        cls_, crit = INCONCLUSIVE, "no criterion applies on this window"
    return StabilityReport(cls_, crit, rng_(fd.q), (L_lo, L_hi), (nt_lo, nt_hi),
                           float(np.max(np.abs(Lnt))), wit, int(keep.sum()), int((~keep).sum()), window)


# plane identities -------------------------------------------------------------

def disc_density_closed_form(mu, s):
    """|N_h|^-1 da density on planes: s^2 + 1 (mu = 0) or sinh^2(mu s)/mu^2 + cosh^2(mu s)."""
    s = np.asarray(s, dtype=float)
    if mu == 0:
        return s * s + 1
    return np.sinh(mu * s) ** 2 / mu ** 2 + np.cosh(mu * s) ** 2


def disc_integral_closed_form(mu, R):
    """2 pi * int_0^R of the density above, by elementary antiderivatives."""
    if mu == 0:
        return 2 * math.pi * (R ** 3 / 3 + R)
    a = 0.5 / mu ** 2 + 0.5
    return 2 * math.pi * (a * math.sinh(2 * mu * R) / (2 * mu) - R / (2 * mu ** 2) + R / 2)


def disc_integral(surf, R, spec=None):
    """int over {s <= R} of |N_h|^-1 da = (4 v^2 + v'^2) / (4 |v|), by quadrature."""
    spec = spec or QuadSpec(rtol=1e-12, atol=0.0, max_levels=8)

    def integrand(E, S):
        vj = surf.vjet(E, S, 1)
        return (4 * vj[0] ** 2 + vj[1] ** 2) / (4 * np.abs(vj[0]))

    return integrate_rect(integrand, (0.0, 2 * math.pi, 0.0, R), spec).value


def plane_identity_suite(surf, n=40, R=2.0, disc_R=1.0):
    """Residuals of the pole-plane identities on an n x n grid of (theta, s) in [0, 2pi) x (0, R]."""
    if not isinstance(surf, PolePlane) or isinstance(surf, Sphere):
        raise InputError("plane_identity_suite needs a pole plane")
    th = np.linspace(0, 2 * math.pi, n, endpoint=False)
    s = np.linspace(R / n, R, n)
    E, S = np.meshgrid(th, s, indexing="ij")
    fd = frame_data(surf, E, S)
    bss = bss_values(surf, E, S)
    mu = surf.mu
    c = 1 + mu * mu
    nh = fd.nh
    out = {
        "nt_min": float(np.min(fd.nt)),
        "bzs": float(np.max(np.abs(fd.bzs - c * nh ** 2))),
        "q": float(np.max(np.abs(fd.q - (1 - c * nh ** 2) ** 2))),
        "bss": float(np.max(np.abs(bss - surf.lam * nh * (1 - c * nh ** 2)))),
        "density": float(np.max(np.abs(
            (4 * fd.vj[0] ** 2 + fd.vj[1] ** 2) / (4 * fd.vj[0]) - disc_density_closed_form(mu, S)))),
    }
    quad = disc_integral(surf, disc_R)
    exact = disc_integral_closed_form(mu, disc_R)
    out["disc_integral"] = quad
    out["disc_closed_form"] = exact
    out["disc_rel_error"] = abs(quad - exact) / abs(exact)
    return out


def l_nh_operator_vs_closed(surf, eps, s):
    """Residual between the operator and closed-form values of L(|N_h|)."""
    return jacobi_operator(surf, "nh", eps, s) - l_nh_closed_form(surf, eps, s)
