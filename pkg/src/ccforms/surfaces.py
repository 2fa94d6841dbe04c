"""Surfaces swept by CC-geodesic flows.

Four families share one description: a curve of initial points, a unit
horizontal initial velocity along it, the geodesic curvature lam, and the
closed-form vertical component v of the variational Jacobi field.

    Helicoid  geodesics leaving the vertical axis with angle sigma(eps)
    PolePlane geodesics leaving a pole p in every direction, lam^2 + kappa <= 0
    Sphere    same flow with lam^2 + kappa > 0, cut at the second pole
    Strip     geodesics leaving a CC-geodesic Gamma orthogonally (velocity J Gamma')
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from .errors import InputError
from .geodesics import GeodesicSpec, geodesic_flow
from .jacobi import JacobiField, VerticalComponent, jacobi_vector
from .model_space import FrameVector, SpaceForm, check_point, vertical_axis

ANGLE_KINDS = ("linear", "arctan", "spline", "callable")


@dataclass(frozen=True)
class AngleFunction:
    """Scalar function of eps with derivatives up to order 3.

    linear:  offset + slope*eps
    arctan:  offset + amplitude*arctan(scale*eps)
    spline:  cubic spline through (knots, values)
    callable: fn(eps, n) returning the n-th derivative
    `of` says whether the function is sigma or theta.
    """

    kind: str
    params: dict = field(default_factory=dict)
    of: str = "sigma"
    fn: object = None

    def __post_init__(self):
        if self.kind not in ANGLE_KINDS:
            raise InputError(f"unknown angle kind {self.kind!r}; expected one of {ANGLE_KINDS}")
        if self.of not in ("sigma", "theta"):
            raise InputError("'of' must be 'sigma' or 'theta'")
        if self.kind == "spline":
            knots = np.asarray(self.params.get("knots", ()), dtype=float)
            values = np.asarray(self.params.get("values", ()), dtype=float)
            if knots.ndim != 1 or len(knots) < 4 or knots.shape != values.shape:
                raise InputError("spline needs matching knots/values with at least 4 entries")
            if np.any(np.diff(knots) <= 0):
                raise InputError("spline knots must be strictly increasing")
            object.__setattr__(self, "fn", CubicSpline(knots, values))
        elif self.kind == "callable" and not callable(self.fn):
            raise InputError("callable angle function needs fn(eps, n)")

    @classmethod
    def linear(cls, slope, offset=0.0, of="sigma"):
        return cls("linear", {"slope": float(slope), "offset": float(offset)}, of)

    @classmethod
    def arctan(cls, scale=1.0, offset=0.0, amplitude=1.0, of="sigma"):
        return cls("arctan", {"scale": float(scale), "offset": float(offset),
                              "amplitude": float(amplitude)}, of)

    @classmethod
    def spline(cls, knots, values, of="sigma"):
        return cls("spline", {"knots": list(map(float, knots)), "values": list(map(float, values))}, of)

    @property
    def smoothness(self):
        if self.kind == "spline":
            return 2
        return int(self.params.get("smoothness", 3)) if self.kind == "callable" else math.inf

    @property
    def window(self):
        if self.kind == "spline":
            k = self.params["knots"]
            return (float(k[0]), float(k[-1]))
        return (-math.inf, math.inf)

    def __call__(self, eps, n=0):
        eps = np.asarray(eps, dtype=float)
        p = self.params
        if self.kind == "linear":
            if n == 0:
                return p.get("offset", 0.0) + p["slope"] * eps
            return np.full(eps.shape, p["slope"] if n == 1 else 0.0)
        if self.kind == "arctan":
            a, k, off = p.get("amplitude", 1.0), p.get("scale", 1.0), p.get("offset", 0.0)
            x = k * eps
            r = 1.0 / (1.0 + x * x)
            if n == 0:
                return off + a * np.arctan(x)
            if n == 1:
                return a * k * r
            if n == 2:
                return -2 * a * k * k * x * r * r
            if n == 3:
                return a * k ** 3 * (6 * x * x - 2) * r ** 3
        elif self.kind == "spline":
            lo, hi = self.window
            if np.any(eps < lo - 1e-12) or np.any(eps > hi + 1e-12):
                raise InputError(f"spline angle evaluated outside its knots [{lo}, {hi}]")
            if n <= 3:
                return self.fn(eps, n)
        else:
            return np.asarray(self.fn(eps, n), dtype=float)
        raise InputError(f"derivative order {n} not available")


class Surface:
    """Common interface of the four flow surfaces."""

    kind = "surface"
    orientation = 1
    param_name = "eps"

    def tau(self):
        return float(self.sf.tau(self.lam))

    def vertical(self, eps):
        raise NotImplementedError

    def tangential(self, eps):
        """(<a', T>, <a', U>) at the base of the geodesic with parameter eps."""
        eps = np.asarray(eps, dtype=float)
        return np.zeros(eps.shape), np.zeros(eps.shape)

    def initial(self, eps):
        raise NotImplementedError

    def s_domain(self):
        return (-math.inf, math.inf)

    def jacobi_field(self, eps):
        aT, aU = self.tangential(eps)
        return JacobiField(self.lam, self.vertical(eps), aT, aU)

    def vjet(self, eps, s, order=3):
        """[v, v', v'', ...] at (eps, s), broadcast."""
        return self.vertical(eps).derivs(s, order)

    def flow(self, eps, s, tol=1e-11):
        """Positions and frame velocities at paired arrays (eps, s), one batch."""
        eps = np.atleast_1d(np.asarray(eps, dtype=float))
        s = np.broadcast_to(np.asarray(s, dtype=float), eps.shape)
        bases, w0 = self.initial(eps)
        targets, idx = np.unique(s, return_inverse=True)
        res = geodesic_flow(self.sf, bases, w0, self.lam, targets, tol, chunk=None)
        rows = np.arange(len(eps))
        return res.position[rows, idx], res.velocity[rows, idx]

    def grid(self, eps, s, tol=1e-11, shared=False):
        """Flow on the tensor grid eps x s; shapes (n, m, dim) and (n, m, 3)."""
        eps = np.atleast_1d(np.asarray(eps, dtype=float))
        bases, w0 = self.initial(eps)
        res = geodesic_flow(self.sf, bases, w0, self.lam, s, tol, chunk=None if shared else "auto")
        return res.position, res.velocity

    def is_regular(self, eps, s, collar=0.0):
        v = self.vjet(eps, s, 0)[0]
        return np.abs(v) > collar


@dataclass(frozen=True)
class Helicoid(Surface):
    sf: SpaceForm
    lam: float
    angle: AngleFunction

    kind = "helicoid"

    def sigma(self, eps, n=0):
        base = self.angle(eps, n)
        if self.angle.of == "sigma":
            return base
        return base + self.sf.theta_shift * np.asarray(eps) if n == 0 else (
            base + self.sf.theta_shift if n == 1 else base)

    def theta(self, eps, n=0):
        base = self.angle(eps, n)
        if self.angle.of == "theta":
            return base
        return base - self.sf.theta_shift * np.asarray(eps) if n == 0 else (
            base - self.sf.theta_shift if n == 1 else base)

    def vertical(self, eps):
        v0pp = 2 * self.sigma(eps, 1) - 4 * self.sf.kappa
        return VerticalComponent(self.tau(), np.ones_like(v0pp), np.zeros_like(v0pp), v0pp)

    def tangential(self, eps):
        eps = np.asarray(eps, dtype=float)
        return np.ones(eps.shape), np.zeros(eps.shape)

    def initial(self, eps):
        eps = np.asarray(eps, dtype=float)
        sg = self.sigma(eps)
        w0 = np.stack([np.cos(sg), np.sin(sg), np.zeros_like(sg)], axis=-1)
        return vertical_axis(self.sf, eps), w0

    def vertical_threshold(self):
        """theta' value at which v acquires a double zero (tau > 0 only)."""
        return -self.lam ** 2 if self.sf.kappa == 1 else -(self.lam ** 2 + self.sf.kappa)

    def vertical_theta_prime(self):
        """theta' of the vertical surfaces (v identically 1)."""
        return 1.0 if self.sf.kappa == 1 else 0.0


def build_helicoid(sf, lam, sigma=None, theta=None):
    if (sigma is None) == (theta is None):
        raise InputError("give exactly one of sigma or theta")
    angle = sigma if sigma is not None else theta
    want = "sigma" if sigma is not None else "theta"
    if not isinstance(angle, AngleFunction):
        raise InputError("angle must be an AngleFunction")
    if angle.of != want:
        angle = AngleFunction(angle.kind, angle.params, want, angle.fn)
    if angle.smoothness < 1:
        raise InputError("angle function must be at least C^1")
    return Helicoid(sf, float(lam), angle)


@dataclass(frozen=True)
class ImmersionStatus:
    immersed: bool
    singular_set_empty: bool
    vertical_surface: bool
    condition: str
    theta_prime_range: tuple


def immersion_status(surf, window, n=401, tol=1e-12):
    """Immersion and singular-set classification from theta' on an eps-window."""
    if not isinstance(surf, Helicoid):
        raise InputError("immersion_status applies to helicoids")
    lo, hi = window
    if not (np.isfinite(lo) and np.isfinite(hi) and lo <= hi):
        raise InputError("window must be a finite interval")
    eps = np.linspace(lo, hi, n)
    try:
        tp = np.asarray(surf.theta(eps, 1), dtype=float)
    except InputError as exc:
        raise InputError(f"theta' not evaluable on window: {exc}") from None
    if not np.all(np.isfinite(tp)):
        raise InputError("theta' not finite on window")
    vertical = bool(np.all(np.abs(tp - surf.vertical_theta_prime()) <= tol))
    rng = (float(tp.min()), float(tp.max()))
    if surf.tau() <= 0:
        empty = bool(np.all(tp >= -tol))
        return ImmersionStatus(True, empty, vertical,
                               "theta' >= 0" if empty else "theta' < 0 somewhere", rng)
    m = surf.vertical_threshold()
    immersed = bool(np.all(np.abs(tp - m) > tol))
    empty = bool(np.all(tp > m + tol))
    if not immersed:
        cond = f"theta' = {m:.17g} somewhere on the window (immersion fails)"
    else:
        cond = f"theta' > {m:.17g}" if empty else f"theta' < {m:.17g} somewhere"
    return ImmersionStatus(immersed, empty, vertical, cond, rng)


@dataclass(frozen=True, eq=False)
class PolePlane(Surface):
    sf: SpaceForm
    lam: float
    pole: np.ndarray

    kind = "plane"
    param_name = "theta"

    @property
    def mu(self):
        return math.sqrt(max(0.0, -(self.lam ** 2 + self.sf.kappa)))

    def vertical(self, eps):
        z = np.zeros(np.shape(eps))
        return VerticalComponent(self.tau(), z, z, z + 2.0)

    def initial(self, eps):
        eps = np.asarray(eps, dtype=float)
        w0 = np.stack([np.cos(eps), np.sin(eps), np.zeros_like(eps)], axis=-1)
        return np.broadcast_to(self.pole, eps.shape + self.pole.shape).copy(), w0

    def s_domain(self):
        return (0.0, math.inf)


@dataclass(frozen=True, eq=False)
class Sphere(PolePlane):
    kind = "sphere"

    def s_domain(self):
        return (0.0, 2 * math.pi / math.sqrt(self.tau()))


def _pole_args(sf, lam, p):
    lam = float(lam)
    if lam < 0:
        raise InputError("lambda must be non-negative")
    p = check_point(sf, np.asarray(sf.origin() if p is None else p, dtype=float))
    return lam, p


def build_pole_surface(sf, lam, p=None):
    lam, p = _pole_args(sf, lam, p)
    if lam ** 2 + sf.kappa > 0:
        raise InputError("planes need lambda^2 + kappa <= 0")
    return PolePlane(sf, lam, p)


def build_sphere(sf, lam, p=None):
    lam, p = _pole_args(sf, lam, p)
    if lam ** 2 + sf.kappa <= 0:
        raise InputError("spheres need lambda^2 + kappa > 0")
    return Sphere(sf, lam, p)


def strip_first_zero(tau, mu):
    """First positive zero of v for the strip data (0, -2, -4 mu), or inf."""
    if tau == 0:
        return -1.0 / mu if mu < 0 else math.inf
    k = math.sqrt(abs(tau))
    c = -2.0 * mu / k
    if tau > 0:
        return (2.0 / k) * (math.pi / 2 - math.atan(c))
    return (2.0 / k) * math.atanh(1.0 / c) if c > 1 else math.inf


@dataclass(frozen=True, eq=False)
class Strip(Surface):
    sf: SpaceForm
    lam: float
    gamma: GeodesicSpec
    s0: float

    kind = "strip"
    orientation = -1

    @property
    def mu(self):
        return self.gamma.lam

    def vertical(self, eps):
        z = np.zeros(np.shape(eps))
        return VerticalComponent(self.tau(), z, z - 2.0, z - 4.0 * self.mu)

    def generator(self, eps, tol=1e-12):
        """Gamma(eps) and its frame velocity."""
        eps = np.atleast_1d(np.asarray(eps, dtype=float))
        res = geodesic_flow(self.sf, self.gamma.base[None], self.gamma.initial_velocity[None],
                            self.gamma.lam, eps, tol)
        return res.position[0], res.velocity[0]

    def initial(self, eps):
        shape = np.shape(eps)
        p, w = self.generator(np.ravel(eps))
        Jw = np.stack([-w[:, 1], w[:, 0], np.zeros(len(w))], axis=-1)
        return p.reshape(shape + p.shape[-1:]), Jw.reshape(shape + (3,))

    def s_domain(self):
        return (0.0, self.s0)


def build_strip(sf, lam, gamma):
    if float(lam) < 0:
        raise InputError("lambda must be non-negative")
    if gamma.sf != sf:
        raise InputError("generator lives in a different space form")
    tau = float(sf.tau(lam))
    s0 = find_first_zero(VerticalComponent(tau, 0.0, -2.0, -4.0 * gamma.lam), tau)
    return Strip(sf, float(lam), gamma, s0)


# root location -------------------------------------------------------------

def scan_step(tau):
    return 0.1 if tau == 0 else math.pi / (8 * math.sqrt(abs(tau)))


def _roots(f, a, b, step, xtol=1e-14):
    """All sign-change roots of f on [a, b] from a uniform scan, polished by Brent."""
    if b <= a:
        return []
    n = max(2, int(math.ceil((b - a) / step)) + 1)
    xs = np.linspace(a, b, n)
    ys = f(xs)
    roots = [float(x) for x, y in zip(xs, ys) if y == 0.0]
    for i in range(n - 1):
        if np.sign(ys[i]) * np.sign(ys[i + 1]) < 0:
            roots.append(brentq(lambda x: float(f(np.array(x))), xs[i], xs[i + 1],
                                xtol=xtol, rtol=4 * np.finfo(float).eps))
    return sorted(roots)


def find_first_zero(vc, tau, s_max=None):
    """First positive zero of v (sign change or double zero), else inf."""
    # a zero of v either changes sign or coincides with a zero of v'
    if s_max is not None:
        span = s_max
    elif tau > 0:
        span = 4 * math.pi / math.sqrt(tau)
    else:
        # keep sinh/cosh finite for tau < 0
        span = 200.0 if tau == 0 else min(200.0, 600.0 / math.sqrt(-tau))
    sing, _ = _zeros(vc, tau, 0.0, span)
    pos = [r for r in sing if r > 1e-12]
    return pos[0] if pos else math.inf


def _zeros(vc, tau, a, b, double_tol=1e-10):
    step = scan_step(tau)
    fv = lambda x: vc.derivs(x, 1)[0]
    fd = lambda x: vc.derivs(x, 1)[1]
    vert = _roots(fd, a, b, step)
    sing = _roots(fv, a, b, step)
    for r in vert:
        # a double zero of v is a zero of v' where v is tiny compared with nearby values
        local = max(abs(float(fv(np.array(r - step)))), abs(float(fv(np.array(r + step)))))
        if abs(float(fv(np.array(r)))) <= double_tol * local and all(abs(r - q) > 1e-9 for q in sing):
            sing.append(r)
    return sorted(sing), vert


def locate_singular_vertical(surf, eps, s_range):
    """Zeros of v (singular points) and of v' (vertical points) along one geodesic."""
    vc = surf.vertical(float(eps))
    a, b = s_range
    return _zeros(vc, surf.tau(), float(a), float(b))


# evaluation ----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SurfacePoint:
    params: tuple
    position: np.ndarray
    Zdir: FrameVector
    Vdir: np.ndarray
    v: float
    vp: float


@dataclass
class SurfaceSample:
    """Vectorized evaluation at paired (eps, s)."""

    eps: np.ndarray
    s: np.ndarray
    position: np.ndarray
    velocity: np.ndarray
    V: np.ndarray
    vjet: np.ndarray


def evaluate(surf, eps, s, tol=1e-11):
    eps = np.atleast_1d(np.asarray(eps, dtype=float))
    s = np.broadcast_to(np.asarray(s, dtype=float), eps.shape).copy()
    lo, hi = surf.s_domain()
    if np.any(s < lo - 1e-12) or np.any(s > hi + 1e-12):
        raise InputError(f"s outside the parameter domain [{lo}, {hi}]")
    pos, vel = surf.flow(eps, s, tol)
    jf = surf.jacobi_field(eps)
    return SurfaceSample(eps, s, pos, vel, jacobi_vector(jf, s), surf.vjet(eps, s, 3))


def eval_surface(surf, eps, s, tol=1e-11):
    smp = evaluate(surf, [eps], [s], tol)
    pos = smp.position[0]
    return SurfacePoint((float(eps), float(s)), pos, FrameVector(pos, smp.velocity[0]),
                        smp.V[0], float(smp.vjet[0, 0]), float(smp.vjet[1, 0]))
