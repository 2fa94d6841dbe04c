"""Horizontal geometry of the flow surfaces.

Everything is expressed through the closed-form vertical component v. In
the moving basis {gamma', J gamma', T} of a characteristic curve, with
D = sqrt(4 v^2 + v'^2) and orientation sign o,

    N    = (0, -2 o v, o v') / D
    |N_h| = 2|v| / D,   <N,T> = o v' / D
    nu_h = -z J gamma',  Z = z gamma',  S = <N,T> nu_h - |N_h| T

where z = o sign(v) is +1 on the regular sets of the surfaces built here.
s-derivatives are exact (order-2 Taylor jets); eps-derivatives use
Richardson-extrapolated central differences.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularityError, UnsupportedError
from .model_space import FrameVector, covariant_term, j_rotate, to_frame
from .surfaces import Surface

SINGULAR_TOL = 1e-14
EPS_STEP = 1e-5


class Jet:
    """Truncated Taylor jet (f, f', f'') in one variable, numpy-broadcasting."""

    __slots__ = ("d0", "d1", "d2")

    def __init__(self, d0, d1=0.0, d2=0.0):
        self.d0, self.d1, self.d2 = (np.asarray(x, dtype=float) for x in (d0, d1, d2))

    @staticmethod
    def lift(x):
        return x if isinstance(x, Jet) else Jet(x)

    def __add__(self, o):
        o = Jet.lift(o)
        return Jet(self.d0 + o.d0, self.d1 + o.d1, self.d2 + o.d2)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.d0, -self.d1, -self.d2)

    def __sub__(self, o):
        return self + (-Jet.lift(o))

    def __rsub__(self, o):
        return Jet.lift(o) - self

    def __mul__(self, o):
        o = Jet.lift(o)
        return Jet(self.d0 * o.d0, self.d1 * o.d0 + self.d0 * o.d1,
                   self.d2 * o.d0 + 2 * self.d1 * o.d1 + self.d0 * o.d2)

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = Jet.lift(o)
        h0 = self.d0 / o.d0
        h1 = (self.d1 - h0 * o.d1) / o.d0
        h2 = (self.d2 - 2 * h1 * o.d1 - h0 * o.d2) / o.d0
        return Jet(h0, h1, h2)

    def __rtruediv__(self, o):
        return Jet.lift(o) / self

    def sqrt(self):
        r0 = np.sqrt(self.d0)
        r1 = self.d1 / (2 * r0)
        return Jet(r0, r1, (self.d2 - 2 * r1 * r1) / (2 * r0))

    def scale(self, c):
        return Jet(c * self.d0, c * self.d1, c * self.d2)


def v_jets(vj):
    """Jets of v and v' from the array [v, v', v'', v''']."""
    return Jet(vj[0], vj[1], vj[2]), Jet(vj[1], vj[2], vj[3])


def _sign(v):
    return np.where(v < 0, -1.0, 1.0)


def nh_nt_jets(surf, vj):
    """Jets of |N_h| and <N,T> along s."""
    v, vp = v_jets(vj)
    D = (4 * v * v + vp * vp).sqrt()
    sg = _sign(vj[0])
    nh = v.scale(2 * sg) / D
    nt = vp.scale(float(surf.orientation)) / D
    return nh, nt


@dataclass
class FrameData:
    """Pointwise frame quantities on arrays of parameters."""

    eps: np.ndarray
    s: np.ndarray
    vj: np.ndarray
    nh: np.ndarray
    nt: np.ndarray
    zsign: np.ndarray
    bzs: np.ndarray
    bzz: np.ndarray
    H: np.ndarray
    q: np.ndarray
    moving: dict          # N, nu_h, Z, S in the moving basis
    frame: dict = None    # same vectors in (X, Y, T) components when velocities are known


def frame_data(surf, eps, s, velocity=None, strict=True):
    eps = np.asarray(eps, dtype=float)
    s = np.asarray(s, dtype=float)
    eps, s = np.broadcast_arrays(eps, s)
    vj = surf.vjet(eps, s, 3)
    v, v1, v2 = vj[0], vj[1], vj[2]
    D2 = 4 * v * v + v1 * v1
    if strict and np.any(np.abs(v) <= SINGULAR_TOL * np.maximum(1.0, np.sqrt(D2))):
        raise SingularityError("frame requested at a singular point (v = 0)")
    D = np.sqrt(D2)
    o = float(surf.orientation)
    zs = o * _sign(v)
    nh = 2 * np.abs(v) / D
    nt = o * v1 / D
    bzs = (2 * v * v2 + 4 * v * v - v1 * v1) / D2
    H = surf.lam * zs
    bzz = 2 * H * nh
    kappa = surf.sf.kappa
    q = (2 * H * nh) ** 2 + (1 + bzs) ** 2 + 4 * (kappa - 1) * nh ** 2
    z = np.zeros_like(v)
    moving = {
        "N": np.stack([z, -2 * o * v / D, o * v1 / D], axis=-1),
        "nu_h": np.stack([z, -zs, z], axis=-1),
        "Z": np.stack([zs, z, z], axis=-1),
        "S": np.stack([z, -zs * nt, -nh], axis=-1),
    }
    fd = FrameData(eps, s, vj, nh, nt, zs, bzs, bzz, H, q, moving)
    if velocity is not None:
        fd.frame = {k: from_moving(velocity, m) for k, m in moving.items()}
    return fd


def from_moving(w, m):
    """Frame components of a vector with moving-basis components m along w."""
    w = np.asarray(w, dtype=float)
    Jw = j_rotate(w)
    T = np.zeros_like(w)
    T[..., 2] = 1.0
    return m[..., :1] * w + m[..., 1:2] * Jw + m[..., 2:3] * T


@dataclass(frozen=True, eq=False)
class SurfaceFrame:
    N: FrameVector
    nu_h: FrameVector
    Z: FrameVector
    S: FrameVector
    nh: float
    nt: float
    at: object


@dataclass(frozen=True)
class ShapeEntries:
    bzz: float
    bzs: float
    bss: float
    H: float


def surface_frame(surf, pt):
    eps, s = pt.params
    fd = frame_data(surf, eps, s, velocity=pt.Zdir.comps)
    vec = {k: FrameVector(pt.position, fd.frame[k]) for k in fd.frame}
    return SurfaceFrame(vec["N"], vec["nu_h"], vec["Z"], vec["S"], float(fd.nh), float(fd.nt), pt)


def unit_normal(surf, pt):
    """Oriented unit normal N at a regular SurfacePoint, so that H = +lambda."""
    return surface_frame(surf, pt).N


def eps_derivative(f, eps, h=EPS_STEP):
    """Richardson-extrapolated central difference of f(eps) (vectorized)."""
    d1 = (f(eps + h) - f(eps - h)) / (2 * h)
    d2 = (f(eps + h / 2) - f(eps - h / 2)) / h
    return (4 * d2 - d1) / 3


def bss_values(surf, eps, s):
    """<B(S), S> = S(<N,T>)/|N_h| with S(f) = a (d_eps f - V1 d_s f), a = -|N_h|/v."""
    eps, s = np.broadcast_arrays(np.asarray(eps, dtype=float), np.asarray(s, dtype=float))
    nh, nt = nh_nt_jets(surf, surf.vjet(eps, s, 3))
    v = surf.vjet(eps, s, 0)[0]

    def nt_of(e):
        return nh_nt_jets(surf, surf.vjet(e, s, 3))[1].d0

    dnt_eps = eps_derivative(nt_of, eps)
    aT, aU = surf.tangential(eps)
    V1 = surf.lam * (aT - v) + aU
    alpha = -nh.d0 / v
    return alpha * (dnt_eps - V1 * nt.d1) / nh.d0


def shape_entries(surf, pt):
    eps, s = pt.params
    fd = frame_data(surf, eps, s)
    return ShapeEntries(float(fd.bzz), float(fd.bzs), float(bss_values(surf, eps, s)), float(fd.H))


def shape_arrays(surf, eps, s):
    fd = frame_data(surf, eps, s)
    return fd, bss_values(surf, eps, s)


def derivative_identities(surf, eps, s):
    """Residuals of Z|N_h| - <N,T>(1 - bzs) and Z<N,T> - |N_h|(bzs - 1)."""
    fd = frame_data(surf, eps, s)
    nh, nt = nh_nt_jets(surf, fd.vj)
    r1 = fd.zsign * nh.d1 - fd.nt * (1 - fd.bzs)
    r2 = fd.zsign * nt.d1 - fd.nh * (fd.bzs - 1)
    return r1, r2


def mean_curvature(surf, pt=None, mode="exact", eps=None, s=None):
    """H with respect to the oriented normal.

    exact: lam times z (z = +1 on regular sets of constructed surfaces).
    numeric: 2H = <D_Z Z, nu_h> from differences of the integrated flow.
    """
    if pt is not None:
        eps, s = pt.params
    if mode == "exact":
        fd = frame_data(surf, eps, s)
        return fd.H if np.ndim(fd.H) else float(fd.H)
    if mode == "numeric":
        H = numeric_mean_curvature(surf, np.atleast_1d(eps), np.atleast_1d(s))
        return H if np.ndim(eps) else float(np.ravel(H)[0])
    raise ValueError(f"unknown mode {mode!r}")


def numeric_normal(surf, w, V):
    """o * (gamma' x V)/|.| in frame components."""
    n = np.cross(w, V)
    return surf.orientation * n / np.linalg.norm(n, axis=-1, keepdims=True)


def numeric_mean_curvature(surf, eps, s, hs=1e-3, he=1e-4, tol=1e-12):
    """Numeric H on the tensor grid eps x s, shape (len(eps), len(s)).

    The normal comes from the numeric tangent plane (flow derivatives in
    eps and s); D_Z Z from a five-point stencil in s plus the connection term.
    """
    eps = np.atleast_1d(np.asarray(eps, dtype=float))
    s = np.atleast_1d(np.asarray(s, dtype=float))
    ne, ns = len(eps), len(s)
    e_off = [0.0, he, -he, he / 2, -he / 2]
    s_off = [-2 * hs, -hs, 0.0, hs, 2 * hs]
    E = np.concatenate([eps + o for o in e_off])
    S = np.concatenate([s + o for o in s_off])
    pos, vel = surf.grid(E, S, tol=tol, shared=True)
    P = [pos[i * ne:(i + 1) * ne, 2 * ns:3 * ns] for i in range(5)]
    d1 = (P[1] - P[2]) / (2 * he)
    d2 = (P[3] - P[4]) / he
    Vamb = (4 * d2 - d1) / 3
    V = to_frame(surf.sf, P[0], Vamb)
    W = [vel[:ne, k * ns:(k + 1) * ns] for k in range(5)]
    w = W[2]
    dw = (W[0] - 8 * W[1] + 8 * W[3] - W[4]) / (12 * hs)
    acc = dw + covariant_term(surf.sf, w, w)
    N = numeric_normal(surf, w, V)
    Nh = N.copy()
    Nh[..., 2] = 0.0
    nu = Nh / np.linalg.norm(Nh, axis=-1, keepdims=True)
    return 0.5 * np.sum(acc * nu, axis=-1)


def l_nh_closed_form(surf, eps, s):
    """L(|N_h|) = (2 v v'' - v'^2 + tau v^2) / v^2 with the numerator taken at s = 0."""
    if not isinstance(surf, Surface):
        raise UnsupportedError("closed form L(|N_h|) needs a flow surface")
    vc = surf.vertical(eps)
    v = vc.derivs(s, 0)[0]
    return vc.numerator() / (v * v)
