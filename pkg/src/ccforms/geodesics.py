"""Carnot-Caratheodory geodesics of prescribed curvature.

The state is mixed: ambient position p and frame components w of the
velocity. The equations are

    p' = F(p) w,    w' = -2 lam J(w) - sum_ij w_i w_j D_{e_i} e_j,

where F is the frame matrix. For horizontal w the connection term vanishes
identically, so w simply rotates in frame components; we integrate the
full system anyway and let the tests confirm that.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import integrator
from .errors import DomainError, InputError, IntegrationError
from .model_space import FrameVector, SpaceForm, check_point, covariant_term, frame_at, j_rotate

VELOCITY_GUARD = 1e-12
CHUNK = 64


@dataclass(frozen=True, eq=False)
class GeodesicSpec:
    sf: SpaceForm
    base: np.ndarray
    phi0: float
    lam: float

    def __post_init__(self):
        object.__setattr__(self, "base", check_point(self.sf, np.asarray(self.base, dtype=float)))

    @property
    def initial_velocity(self):
        return np.array([np.cos(self.phi0), np.sin(self.phi0), 0.0])


@dataclass(frozen=True, eq=False)
class GeodesicState:
    s: float
    position: np.ndarray
    velocity: FrameVector


@dataclass
class FlowResult:
    """Positions (n, m, dim) and frame velocities (n, m, 3) on an s-grid."""

    s: np.ndarray
    position: np.ndarray
    velocity: np.ndarray
    steps: int = 0
    renormalizations: int = 0
    sphere_drift: float = 0.0


def thread_count():
    env = os.environ.get("CCFORMS_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise InputError(f"CCFORMS_THREADS must be an integer, got {env!r}")
    return os.cpu_count() or 1


def _rhs(sf, lam):
    d = sf.dim

    def fun(s, Y):
        p, w = Y[:, :d], Y[:, d:]
        dp = np.einsum("nij,nj->ni", frame_at(sf, p, check=False), w)
        dw = -2.0 * lam[:, None] * j_rotate(w) - covariant_term(sf, w, w)
        return np.concatenate([dp, dw], axis=1)

    return fun


class _Guard:
    """Post-step projection: sphere renormalization, unit speed, disc check."""

    def __init__(self, sf):
        self.sf = sf
        self.renorm = 0
        self.drift = 0.0
        self.last_s = 0.0

    def __call__(self, s, Y):
        sf, d = self.sf, self.sf.dim
        changed = False
        if sf.kappa == 1:
            nrm = np.linalg.norm(Y[:, :d], axis=1)
            # drift per unit arc length since the previous accepted step
            ds = abs(s - self.last_s)
            if ds > 0:
                self.drift = max(self.drift, float(np.max(np.abs(nrm - 1.0))) / ds)
            Y = Y.copy()
            Y[:, :d] /= nrm[:, None]
            changed = True
        elif sf.kappa == -1:
            r2 = Y[:, 0] ** 2 + Y[:, 1] ** 2
            if np.any(r2 > 1.0 - sf.disc_margin):
                raise DomainError(f"geodesic reached the disc margin at s={s:.17g}")
        self.last_s = s
        speed = np.linalg.norm(Y[:, d:], axis=1)
        bad = np.abs(speed - 1.0) > VELOCITY_GUARD
        if np.any(bad):
            if not changed:
                Y = Y.copy()
                changed = True
            Y[bad, d:] /= speed[bad, None]
            self.renorm += int(np.count_nonzero(bad))
        return Y if changed else None


def _flow_chunk(sf, bases, w0, lam, s_values, tol):
    d = sf.dim
    Y0 = np.concatenate([bases, w0], axis=1)
    out = np.empty((len(s_values),) + Y0.shape)
    steps = renorm = 0
    drift = 0.0
    for mask in (s_values >= 0, s_values < 0):
        if not np.any(mask):
            continue
        guard = _Guard(sf)
        try:
            vals, traj = integrator.integrate(_rhs(sf, lam), Y0, s_values[mask], 0.0,
                                              rtol=tol, atol=tol * 1e-2, post_step=guard)
        except IntegrationError as exc:
            raise IntegrationError(str(exc), s=exc.s, state=_split(exc.state, d)) from None
        out[mask] = vals
        steps += traj.n_steps
        renorm += guard.renorm
        drift = max(drift, guard.drift)
    return out, steps, renorm, drift


def _split(Y, d):
    if Y is None:
        return None
    return Y[:, :d].copy(), Y[:, d:].copy()


def geodesic_flow(sf, bases, w0, lam, s_values, tol=1e-11, threads=None, chunk="auto"):
    """Integrate a batch of geodesics and sample them at `s_values`.

    bases: (n, dim); w0: (n, 3) unit horizontal frame velocities; lam: scalar or (n,).
    Rows are split into fixed-size chunks so results do not depend on the
    thread count; chunk=None keeps all rows in one batch with shared steps.
    """
    bases = np.atleast_2d(np.asarray(bases, dtype=float))
    n = bases.shape[0]
    w0 = np.broadcast_to(np.asarray(w0, dtype=float), (n, 3)).copy()
    lam = np.broadcast_to(np.asarray(lam, dtype=float), (n,)).copy()
    s_values = np.atleast_1d(np.asarray(s_values, dtype=float))
    if not tol > 0:
        raise InputError("tol must be positive")
    if not np.all(np.isfinite(s_values)):
        raise InputError("s values must be finite")
    check_point(sf, bases)
    size = n if chunk is None else (CHUNK if chunk == "auto" else int(chunk))
    chunks = [slice(i, min(i + size, n)) for i in range(0, n, size)]

    def job(sl):
        return _flow_chunk(sf, bases[sl], w0[sl], lam[sl], s_values, tol)

    threads = thread_count() if threads is None else threads
    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(job, chunks))
    else:
        results = [job(sl) for sl in chunks]
    Y = np.concatenate([r[0] for r in results], axis=1)  # (m, n, dim+3)
    Y = np.transpose(Y, (1, 0, 2))
    d = sf.dim
    return FlowResult(s_values, Y[..., :d], Y[..., d:], steps=sum(r[1] for r in results),
                      renormalizations=sum(r[2] for r in results),
                      sphere_drift=max(r[3] for r in results))


def integrate_geodesic(spec, s, tol=1e-11):
    """State of the geodesic `spec` at arc length s (or an array of s)."""
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    res = geodesic_flow(spec.sf, spec.base[None], spec.initial_velocity[None], spec.lam, s_arr, tol)
    states = [GeodesicState(float(si), res.position[0, i], FrameVector(res.position[0, i], res.velocity[0, i]))
              for i, si in enumerate(s_arr)]
    return states[0] if np.ndim(s) == 0 else states


def closed_form_geodesic(spec, s):
    """tanh formula (kappa=-1, lam=0, base on the axis) or straight line (kappa=0, lam=0).

    Returns None when no closed form is available.
    """
    sf, p = spec.sf, spec.base
    if spec.lam != 0 or sf.kappa == 1:
        return None
    v = frame_at(sf, p) @ spec.initial_velocity
    if sf.kappa == 0:
        pos = p + s * v
    elif p[0] == 0 and p[1] == 0:
        pos = p + np.tanh(s) * v
    else:
        return None
    return GeodesicState(float(s), pos, FrameVector(pos, spec.initial_velocity))


def curvature_estimate(states, sf=None):
    """-<gamma'', J gamma'>/2 from a uniformly sampled state sequence.

    The covariant derivative is a central difference of the frame components
    plus the connection term; five-point stencils are used when possible.
    `sf` may be omitted for horizontal velocities, where the connection
    term does not depend on kappa.
    """
    states = list(states)
    if len(states) < 3:
        raise InputError("curvature_estimate needs at least 3 states")
    s = np.array([st.s for st in states])
    w = np.array([st.velocity.comps for st in states])
    h = np.diff(s)
    if not np.allclose(h, h[0], rtol=1e-9, atol=0):
        raise InputError("states must be uniformly spaced in s")
    h = h[0]
    if len(states) >= 5:
        dw = (w[:-4] - 8 * w[1:-3] + 8 * w[3:-1] - w[4:]) / (12 * h)
        mid = w[2:-2]
    else:
        dw = (w[2:] - w[:-2]) / (2 * h)
        mid = w[1:-1]
    if sf is None:
        if np.max(np.abs(w[:, 2])) > 1e-8:
            raise InputError("non-horizontal velocities: pass the SpaceForm explicitly")
        sf = SpaceForm(1) if len(states[0].position) == 4 else SpaceForm(0)
    acc = dw + covariant_term(sf, mid, mid)
    return float(np.mean(-0.5 * np.sum(acc * j_rotate(mid), axis=1)))


def curvature_of_flow(sf, s, velocity):
    """Same estimator for raw arrays: s (m,), velocity (m, 3)."""
    states = [GeodesicState(float(si), np.zeros(sf.dim), FrameVector(np.zeros(sf.dim), vi))
              for si, vi in zip(s, velocity)]
    return curvature_estimate(states, sf)
