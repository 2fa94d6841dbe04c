"""Embedded Runge-Kutta 6(5) pair (Verner) for batched first-order systems.

The state has shape (n, d) and all rows share one step-size sequence; the
error norm is the maximum over the batch. Sharing steps makes finite
differences across rows (neighbouring initial data) behave like
differences of one smooth discrete flow map.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IntegrationError

# nodes, stage matrix, 6th order weights and error weights (b6 - b5)
C = np.array([0.0, 9 / 50, 1 / 6, 1 / 4, 53 / 100, 3 / 5, 4 / 5, 1.0, 1.0])
A = [
    [],
    [9 / 50],
    [29 / 324, 25 / 324],
    [1 / 16, 0, 3 / 16],
    [79129 / 250000, 0, -261237 / 250000, 19663 / 15625],
    [1336883 / 4909125, 0, -25476 / 30875, 194159 / 185250, 8225 / 78546],
    [-2459386 / 14727375, 0, 19504 / 30875, 2377474 / 13615875, -6157250 / 5773131, 902 / 735],
    [2699 / 7410, 0, -252 / 1235, -1393253 / 3993990, 236875 / 72618, -135 / 49, 15 / 22],
    [11 / 144, 0, 0, 256 / 693, 0, 125 / 504, 125 / 528, 5 / 72],
]
B = np.array(A[8] + [0.0])
B5 = np.array([28 / 477, 0, 0, 212 / 441, -312500 / 366177, 2125 / 1764, 0, -2105 / 35532, 2995 / 17766])
E = B - B5
ORDER = 6


@dataclass
class Trajectory:
    """Accepted nodes of one integration run (one direction)."""

    s: np.ndarray        # (m,)
    y: np.ndarray        # (m, n, d)
    f: np.ndarray        # (m, n, d)
    n_steps: int
    n_rejected: int

    def dense(self, s):
        """Cubic Hermite interpolation between accepted nodes."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        grid = self.s
        if grid[-1] < grid[0]:
            grid, y, f = grid[::-1], self.y[::-1], self.f[::-1]
        else:
            y, f = self.y, self.f
        if np.any(s < grid[0] - 1e-14) or np.any(s > grid[-1] + 1e-14):
            raise ValueError("dense output requested outside the integrated range")
        i = np.clip(np.searchsorted(grid, s, side="right") - 1, 0, len(grid) - 2)
        h = grid[i + 1] - grid[i]
        u = ((s - grid[i]) / h)[:, None, None]
        hh = h[:, None, None]
        h00 = (1 + 2 * u) * (1 - u) ** 2
        h10 = u * (1 - u) ** 2
        h01 = u * u * (3 - 2 * u)
        h11 = u * u * (u - 1)
        return h00 * y[i] + h10 * hh * f[i] + h01 * y[i + 1] + h11 * hh * f[i + 1]


def _initial_step(fun, s0, y0, f0, direction, rtol, atol):
    scale = atol + rtol * np.abs(y0)
    d0 = np.max(np.abs(y0) / scale)
    d1 = np.max(np.abs(f0) / scale)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    f1 = fun(s0 + direction * h0, y0 + direction * h0 * f0)
    d2 = np.max(np.abs(f1 - f0) / scale) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / ORDER)
    return min(100 * h0, h1)


def integrate(fun, y0, targets, s0=0.0, rtol=1e-10, atol=1e-12, post_step=None,
              max_steps=200000, h_min=1e-14, keep_nodes=False, h_max=np.inf):
    """Integrate y' = fun(s, y) from s0 through `targets` (all on one side of s0).

    Steps are clipped so the solution lands exactly on each target. Returns
    (values at targets with shape (len(targets), n, d), Trajectory or None).
    `post_step(s, y)` may return a corrected state (projection onto a manifold).
    """
    y = np.array(y0, dtype=float)
    targets = np.asarray(targets, dtype=float)
    out = np.empty((len(targets),) + y.shape)
    if len(targets) == 0:
        return out, None
    offsets = targets - s0
    if np.any(offsets > 0) and np.any(offsets < 0):
        raise ValueError("targets must lie on one side of s0")
    direction = -1.0 if np.any(offsets < 0) else 1.0
    order = np.argsort(direction * offsets, kind="stable")

    s = float(s0)
    f = fun(s, y)
    nodes_s, nodes_y, nodes_f = [s], [y.copy()], [f.copy()]
    k = 0
    while k < len(order) and targets[order[k]] == s:
        out[order[k]] = y
        k += 1
    h = _initial_step(fun, s, y, f, direction, rtol, atol) if k < len(order) else 0.0
    h = min(h, h_max)
    steps = rejected = 0
    K = np.empty((9,) + y.shape)
    while k < len(order):
        target = targets[order[k]]
        remaining = abs(target - s)
        land = h >= remaining * (1 - 1e-12)
        step = remaining if land else h
        if step < h_min * max(1.0, abs(s)):
            raise IntegrationError(f"step size underflow at s={s:.17g}", s=s, state=y.copy())
        hs = direction * step
        K[0] = f
        for i in range(1, 9):
            yi = y + hs * np.tensordot(A[i], K[:i], axes=(0, 0))
            K[i] = fun(s + C[i] * hs, yi)
        y_new = y + hs * np.tensordot(B[:8], K[:8], axes=(0, 0))
        # the last stage is f at y_new (first-same-as-last)
        err = hs * np.tensordot(E, K, axes=(0, 0))
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        en = np.max(np.abs(err) / scale)
        steps += 1
        if steps > max_steps:
            raise IntegrationError(f"step budget exhausted at s={s:.17g}", s=s, state=y.copy())
        if not np.isfinite(en):
            rejected += 1
            h = 0.25 * step
            continue
        if en <= 1.0:
            s = target if land else s + hs
            y = y_new
            f = K[8]
            if post_step is not None:
                fixed = post_step(s, y)
                if fixed is not None:
                    y = fixed
                    f = fun(s, y)
            if keep_nodes:
                nodes_s.append(s)
                nodes_y.append(y.copy())
                nodes_f.append(f.copy())
            while k < len(order) and targets[order[k]] == target and land:
                out[order[k]] = y
                k += 1
            fac = 5.0 if en == 0 else min(5.0, max(0.2, 0.9 * en ** (-1.0 / ORDER)))
            if land and step < h:
                # a clipped step says little about a larger one
                h = h * min(1.0, fac)
            else:
                h = step * fac
            h = min(h, h_max)
        else:
            rejected += 1
            h = step * max(0.1, 0.9 * en ** (-1.0 / ORDER))
    traj = None
    if keep_nodes:
        traj = Trajectory(np.array(nodes_s), np.array(nodes_y), np.array(nodes_f), steps, rejected)
    else:
        traj = Trajectory(np.array([s]), y[None], f[None], steps, rejected)
    return out, traj


def integrate_grid(fun, y0, s_values, rtol=1e-10, atol=1e-12, post_step=None, **kw):
    """Integrate both ways from 0 and return the states at every s in `s_values`.

    Output has shape (len(s_values), n, d). Stats from both sweeps are summed.
    """
    s_values = np.asarray(s_values, dtype=float)
    y0 = np.asarray(y0, dtype=float)
    out = np.empty((len(s_values),) + y0.shape)
    stats = {"steps": 0, "rejected": 0}
    for mask in (s_values >= 0, s_values < 0):
        if not np.any(mask):
            continue
        vals, traj = integrate(fun, y0, s_values[mask], 0.0, rtol, atol, post_step, **kw)
        out[mask] = vals
        stats["steps"] += traj.n_steps
        stats["rejected"] += traj.n_rejected
    return out, stats
