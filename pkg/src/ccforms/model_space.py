"""The model spaces M(kappa) for kappa in {-1, 0, 1}.

Points are plain numpy arrays in ambient coordinates: (x, y, t) for
kappa <= 0 and (x1, y1, x2, y2) on the unit sphere of R^4 for kappa = 1.
Tangent vectors are kept as components (a, b, c) in the orthonormal frame
{X, Y, T}; every function here broadcasts over leading axes.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DomainError, InputError

SPHERE_TOL = 1e-12
DISC_MARGIN = 1e-9


@dataclass(frozen=True)
class SpaceForm:
    kappa: int
    disc_margin: float = DISC_MARGIN

    def __post_init__(self):
        if self.kappa not in (-1, 0, 1):
            raise InputError(f"kappa must be -1, 0 or 1, got {self.kappa!r}")
        if not self.disc_margin >= 0:
            raise InputError("disc_margin must be non-negative")

    @property
    def webster_curvature(self):
        return self.kappa

    @property
    def dim(self):
        # ambient coordinate count
        return 4 if self.kappa == 1 else 3

    @property
    def theta_shift(self):
        """Slope c with sigma(eps) = theta(eps) + c*eps."""
        return 1.0 if self.kappa == 1 else 2.0 * self.kappa

    def tau(self, lam):
        return 4.0 * (np.asarray(lam, dtype=float) ** 2 + self.kappa)

    def origin(self):
        return np.array([1.0, 0.0, 0.0, 0.0]) if self.kappa == 1 else np.zeros(3)

    def structure_constants(self):
        return structure_constants(self.kappa)


@dataclass(frozen=True, eq=False)
class FrameVector:
    """Tangent vector at `base` with components along X, Y, T."""

    base: np.ndarray
    comps: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        object.__setattr__(self, "base", np.asarray(self.base, dtype=float))
        c = np.asarray(self.comps, dtype=float)
        if c.shape[-1:] != (3,):
            raise InputError("frame components must have trailing length 3")
        object.__setattr__(self, "comps", c)

    @property
    def a(self):
        return self.comps[..., 0]

    @property
    def b(self):
        return self.comps[..., 1]

    @property
    def c(self):
        return self.comps[..., 2]

    def norm(self):
        return np.linalg.norm(self.comps, axis=-1)

    def dot(self, other):
        return np.sum(self.comps * _comps(other), axis=-1)

    def is_horizontal(self, tol=1e-12):
        return bool(np.all(np.abs(self.c) <= tol))

    def is_vertical(self, tol=1e-12):
        return bool(np.all(np.hypot(self.a, self.b) <= tol))


def _comps(v):
    return v.comps if isinstance(v, FrameVector) else np.asarray(v, dtype=float)


@lru_cache(maxsize=None)
def structure_constants(kappa):
    """c[i, j, k] with [e_i, e_j] = sum_k c[i, j, k] e_k, e = (X, Y, T)."""
    c = np.zeros((3, 3, 3))
    c[0, 1, 2] = -2.0          # [X,Y] = -2T
    c[0, 2, 1] = 2.0 * kappa   # [X,T] = 2k Y
    c[1, 2, 0] = -2.0 * kappa  # [Y,T] = -2k X
    for i, j in ((0, 1), (0, 2), (1, 2)):
        c[j, i] = -c[i, j]
    c.setflags(write=False)
    return c


@lru_cache(maxsize=None)
def _koszul(kappa):
    c = structure_constants(kappa)
    # <D_{e_i} e_j, e_k> = (c_ij^k - c_jk^i + c_ki^j) / 2
    g = 0.5 * (c - np.transpose(c, (2, 0, 1)) + np.transpose(c, (1, 2, 0)))
    g.setflags(write=False)
    return g


def connection_coefficients(sf):
    """Table G[i, j, k] = <D_{e_i} e_j, e_k> in the frame (X, Y, T)."""
    return _koszul(sf.kappa)


def covariant_term(sf, u, w):
    """sum_ij u_i w_j D_{e_i} e_j, the connection part of D_u w for frame fields."""
    return np.einsum("...i,...j,ijk->...k", _comps(u), _comps(w), _koszul(sf.kappa))


def j_rotate(v):
    """J(a, b, c) = (-b, a, 0)."""
    if isinstance(v, FrameVector):
        return FrameVector(v.base, j_rotate(v.comps))
    v = np.asarray(v, dtype=float)
    out = np.zeros(np.broadcast_shapes(v.shape, (3,)))
    out[..., 0] = -v[..., 1]
    out[..., 1] = v[..., 0]
    return out


def check_point(sf, p):
    p = np.asarray(p, dtype=float)
    if p.shape[-1] != sf.dim:
        raise DomainError(f"expected {sf.dim} coordinates for kappa={sf.kappa}, got {p.shape[-1]}")
    if not np.all(np.isfinite(p)):
        raise DomainError("non-finite point")
    if sf.kappa == -1:
        r2 = p[..., 0] ** 2 + p[..., 1] ** 2
        if np.any(r2 > 1.0 - sf.disc_margin):
            raise DomainError(f"point outside the disc margin (x^2+y^2 = {np.max(r2):.17g})")
    elif sf.kappa == 1:
        n = np.sum(p * p, axis=-1)
        if np.any(np.abs(n - 1.0) > 1e-9):
            raise DomainError(f"point off the unit sphere (|p|^2 = {np.max(n):.17g})")
    return p


def normalize_point(sf, p):
    """Project kappa=1 points back onto S^3; other kappas pass through."""
    p = np.asarray(p, dtype=float)
    if sf.kappa != 1:
        return p
    return p / np.linalg.norm(p, axis=-1, keepdims=True)


def frame_at(sf, p, check=True):
    """Columns X, Y, T at p in ambient coordinates, shape (..., dim, 3)."""
    p = check_point(sf, p) if check else np.asarray(p, dtype=float)
    if sf.kappa == 1:
        x1, y1, x2, y2 = np.moveaxis(p, -1, 0)
        X = np.stack([-x2, y2, x1, -y1], axis=-1)
        Y = np.stack([-y2, -x2, y1, x1], axis=-1)
        T = np.stack([-y1, x1, -y2, x2], axis=-1)
        return np.stack([X, Y, T], axis=-1)
    k = sf.kappa
    x, y, t = np.moveaxis(p, -1, 0)
    inv_rho = 1.0 + k * (x * x + y * y)
    c, s = np.cos(2 * k * t), np.sin(2 * k * t)
    zero, one = np.zeros_like(x), np.ones_like(x)
    X = np.stack([inv_rho * c, -inv_rho * s, y * c + x * s], axis=-1)
    Y = np.stack([inv_rho * s, inv_rho * c, y * s - x * c], axis=-1)
    T = np.stack([zero, zero, one], axis=-1)
    return np.stack([X, Y, T], axis=-1)


def metric_tensor(sf, p):
    """Ambient metric g at p, written independently of the frame."""
    p = np.asarray(p, dtype=float)
    if sf.kappa == 1:
        return np.broadcast_to(np.eye(4), p.shape[:-1] + (4, 4)).copy()
    x, y = p[..., 0], p[..., 1]
    rho = 1.0 / (1.0 + sf.kappa * (x * x + y * y))
    eta = np.stack([-rho * y, rho * x, np.ones_like(x)], axis=-1)
    g = np.einsum("...i,...j->...ij", eta, eta)
    g[..., 0, 0] += rho ** 2
    g[..., 1, 1] += rho ** 2
    return g


def inner(sf, p, u, v):
    return np.einsum("...i,...ij,...j->...", u, metric_tensor(sf, p), v)


def to_ambient(sf, p, w):
    return np.einsum("...ij,...j->...i", frame_at(sf, p, check=False), _comps(w))


def to_frame(sf, p, u):
    """Frame components of an ambient tangent vector u at p."""
    F = frame_at(sf, p, check=False)
    G = metric_tensor(sf, p)
    return np.einsum("...ia,...ij,...j->...a", F, G, np.asarray(u, dtype=float))


def contact_form(sf, p, u):
    p = np.asarray(p, dtype=float)
    u = np.asarray(u, dtype=float)
    if sf.kappa == 1:
        x1, y1, x2, y2 = np.moveaxis(p, -1, 0)
        return x1 * u[..., 1] - y1 * u[..., 0] + x2 * u[..., 3] - y2 * u[..., 2]
    x, y = p[..., 0], p[..., 1]
    rho = 1.0 / (1.0 + sf.kappa * (x * x + y * y))
    return rho * (x * u[..., 1] - y * u[..., 0]) + u[..., 2]


def _unit_complex(angle):
    return np.cos(angle), np.sin(angle)


def vertical_translation(sf, s, p):
    """Flow of T for time s."""
    p = np.array(p, dtype=float)
    if sf.kappa == 1:
        c, sn = _unit_complex(s)
        out = np.empty_like(p)
        # multiply z1 = x1 + i y1 and z2 = x2 + i y2 by e^{is}
        out[..., 0] = c * p[..., 0] - sn * p[..., 1]
        out[..., 1] = sn * p[..., 0] + c * p[..., 1]
        out[..., 2] = c * p[..., 2] - sn * p[..., 3]
        out[..., 3] = sn * p[..., 2] + c * p[..., 3]
        return out
    p[..., 2] = p[..., 2] + s
    return p


def vertical_rotation(sf, angle, p):
    """Rotation by `angle` about the vertical line through the origin."""
    p = np.array(p, dtype=float)
    c, sn = _unit_complex(angle)
    i, j = (2, 3) if sf.kappa == 1 else (0, 1)
    a, b = p[..., i].copy(), p[..., j].copy()
    p[..., i] = c * a - sn * b
    p[..., j] = sn * a + c * b
    return p


def pushforward(sf, isometry, param, p, w):
    """Frame components at isometry(p) of d(isometry)(w).

    Both isometries are linear in ambient coordinates up to a translation,
    so the differential is the map applied to vectors with the translation removed.
    """
    p = np.asarray(p, dtype=float)
    u = to_ambient(sf, p, w)
    zero = np.zeros_like(p)
    du = isometry(sf, param, u + zero) - isometry(sf, param, zero)
    q = isometry(sf, param, p)
    return q, to_frame(sf, q, du)


def vertical_axis(sf, eps):
    """The vertical line through the origin, Gamma(eps), with |Gamma'| = 1."""
    eps = np.asarray(eps, dtype=float)
    if sf.kappa == 1:
        z = np.zeros_like(eps)
        return np.stack([np.cos(eps), np.sin(eps), z, z], axis=-1)
    z = np.zeros_like(eps)
    return np.stack([z, z, eps], axis=-1)


def random_points(sf, rng, n, radius=0.9, t_range=3.0):
    """Random points of M(kappa); for kappa=-1 inside the disc of given Euclidean radius."""
    if sf.kappa == 1:
        p = rng.normal(size=(n, 4))
        return p / np.linalg.norm(p, axis=1, keepdims=True)
    r = radius * np.sqrt(rng.uniform(size=n))
    a = rng.uniform(0, 2 * np.pi, size=n)
    if sf.kappa == 0:
        r = r / radius * 3.0
    t = rng.uniform(-t_range, t_range, size=n)
    return np.stack([r * np.cos(a), r * np.sin(a), t], axis=-1)
