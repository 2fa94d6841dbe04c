"""Vertical components of CC-Jacobi fields and the moving-basis decomposition.

A Jacobi field along a CC-geodesic of curvature lam, in the basis
{gamma', J gamma', T}, reads

    ( lam (<a', T> - v) + <a', U>,  v'/2,  v ),

where v solves v''' + tau v' = 0 with tau = 4 (lam^2 + kappa).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .model_space import SpaceForm, j_rotate, to_frame

SERIES_TAU = 1e-8


def _basis(tau, s):
    """S1, S2, C with v = v0 + v0p S1 + v0pp S2 and S1' = C, S2' = S1, C' = -tau S1."""
    tau = np.asarray(tau, dtype=float)
    s = np.asarray(s, dtype=float)
    tau, s = np.broadcast_arrays(tau, s)
    S1 = np.empty(s.shape)
    S2 = np.empty(s.shape)
    Cc = np.empty(s.shape)
    small = np.abs(tau) < SERIES_TAU
    pos = (tau >= SERIES_TAU)
    neg = (tau <= -SERIES_TAU)
    if np.any(small):
        t, x = tau[small], s[small]
        x2 = x * x
        # truncated series; the next terms are below 1e-24 * |s|^7 for |tau| < 1e-8
        S1[small] = x * (1 - t * x2 / 6 + t * t * x2 * x2 / 120)
        S2[small] = x2 * (0.5 - t * x2 / 24 + t * t * x2 * x2 / 720)
        Cc[small] = 1 - t * x2 / 2 + t * t * x2 * x2 / 24
    if np.any(pos):
        k = np.sqrt(tau[pos])
        x = s[pos]
        S1[pos] = np.sin(k * x) / k
        # half-angle form avoids the cancellation in 1 - cos
        S2[pos] = 2 * (np.sin(0.5 * k * x) / k) ** 2
        Cc[pos] = np.cos(k * x)
    if np.any(neg):
        k = np.sqrt(-tau[neg])
        x = s[neg]
        S1[neg] = np.sinh(k * x) / k
        S2[neg] = 2 * (np.sinh(0.5 * k * x) / k) ** 2
        Cc[neg] = np.cosh(k * x)
    return S1, S2, Cc


@dataclass(frozen=True)
class VerticalComponent:
    """Solution of v''' + tau v' = 0 with v(0), v'(0), v''(0) given.

    Fields may be numpy arrays (one solution per entry); evaluation broadcasts.
    """

    tau: object
    v0: object
    v0p: object
    v0pp: object

    @property
    def case(self):
        t = np.asarray(self.tau)
        if t.ndim:
            raise InputError("case is only defined for a scalar tau")
        return "hyperbolic" if t < 0 else ("polynomial" if t == 0 else "trigonometric")

    @property
    def coefficients(self):
        """(a, b, c) in the case formulas.

        tau < 0: v = (a sinh(ks) + b cosh(ks))/k + c, k = sqrt(-tau)
        tau = 0: v = a s^2 + b s + c
        tau > 0: v = (a sin(ks) - b cos(ks))/k + c, k = sqrt(tau)
        """
        tau, v0, v0p, v0pp = (float(x) for x in (self.tau, self.v0, self.v0p, self.v0pp))
        if tau == 0:
            return 0.5 * v0pp, v0p, v0
        k = math.sqrt(abs(tau))
        return v0p, v0pp / k, v0 + v0pp / tau

    def case_formula(self, s):
        """Evaluate v through the case formulas; prone to cancellation for tiny |tau|."""
        a, b, c = self.coefficients
        tau = float(self.tau)
        s = np.asarray(s, dtype=float)
        if tau == 0:
            return a * s * s + b * s + c
        k = math.sqrt(abs(tau))
        if tau < 0:
            return (a * np.sinh(k * s) + b * np.cosh(k * s)) / k + c
        return (a * np.sin(k * s) - b * np.cos(k * s)) / k + c

    def derivs(self, s, order=3):
        """Array [v, v', ..., v^(order)] evaluated at s (exact derivatives)."""
        S1, S2, Cc = _basis(self.tau, s)
        tau = np.asarray(self.tau, dtype=float)
        v0, v0p, v0pp = (np.asarray(x, dtype=float) for x in (self.v0, self.v0p, self.v0pp))
        v = v0 + v0p * S1 + v0pp * S2
        d1 = v0p * Cc + v0pp * S1
        d2 = -tau * v0p * S1 + v0pp * Cc
        out = [v, d1, d2]
        while len(out) <= order:
            # v^(n+2) = -tau v^(n)
            out.append(-tau * out[-2])
        return np.array(np.broadcast_arrays(*out[:order + 1]))

    def __call__(self, s):
        return self.derivs(s, 0)[0]

    def numerator(self):
        """2 v v'' - v'^2 + tau v^2, which is constant in s."""
        return 2 * self.v0 * self.v0pp - self.v0p ** 2 + self.tau * self.v0 ** 2


def solve_vertical(tau, v0, v0p, v0pp):
    return VerticalComponent(tau, v0, v0p, v0pp)


@dataclass(frozen=True)
class JacobiField:
    """Jacobi field along a geodesic of curvature lam.

    alpha_T and alpha_U are <a'(eps), T> and <a'(eps), U(eps)> for the base curve a.
    """

    lam: float
    v: VerticalComponent
    alpha_T: float = 0.0
    alpha_U: float = 0.0


def jacobi_vector(jf, s):
    """Components in the moving basis {gamma', J gamma', T}, shape (..., 3)."""
    v, vp = jf.v.derivs(s, 1)
    first = jf.lam * (jf.alpha_T - v) + jf.alpha_U
    return np.stack(np.broadcast_arrays(first, 0.5 * vp, v), axis=-1)


def moving_basis_components(w, comps):
    """Project frame components onto {w, J w, T} with w unit horizontal."""
    Jw = j_rotate(w)
    return np.stack([np.sum(comps * w, -1), np.sum(comps * Jw, -1), comps[..., 2]], axis=-1)


def numeric_jacobi(sf, flow, eps, s, h=1e-4, richardson=True):
    """Central-difference approximation of dF/deps in the moving basis.

    `flow(eps_array, s)` must return (positions (n, dim), velocities (n, 3)) for
    rows eps_array at the matching entries of s. Evaluates at eps, eps +- h and,
    with Richardson extrapolation, eps +- h/2.
    """
    eps = np.atleast_1d(np.asarray(eps, dtype=float))
    s = np.broadcast_to(np.asarray(s, dtype=float), eps.shape)
    if not h > 0:
        raise InputError("h must be positive")
    offs = [0.0, h, -h] + ([h / 2, -h / 2] if richardson else [])
    E = np.concatenate([eps + o for o in offs])
    S = np.tile(s, len(offs))
    pos, vel = flow(E, S)
    n = len(eps)
    P = [pos[i * n:(i + 1) * n] for i in range(len(offs))]
    d1 = (P[1] - P[2]) / (2 * h)
    if richardson:
        d2 = (P[3] - P[4]) / h
        d = (4 * d2 - d1) / 3
    else:
        d = d1
    comps = to_frame(sf, P[0], d)
    return moving_basis_components(vel[:n], comps)
