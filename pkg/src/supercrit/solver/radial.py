"""Radial shooting for -v'' - (d-1)/r v' = v^{p-1} on a ball, v'(0) = 0, v(R) = 0."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..reduction import critical_exponent


class NoSolutionError(ValueError):
    """No positive radial solution exists for these parameters."""


@dataclass(frozen=True)
class RadialSolution:
    d: int
    p: float
    radius: float
    center_value: float
    r: np.ndarray
    v: np.ndarray
    boundary_miss: float
    shots: int

    def __call__(self, r) -> np.ndarray:
        return np.interp(np.asarray(r, dtype=float), self.r, self.v, right=0.0)


def _shoot(alpha, d, p, radius, steps):
    """RK4 in s = log r.  With w(s) = v(e^s):  w'' + (d-2) w' = -e^{2s} |w|^{p-2} w.

    Returns (crossed, w at the outer radius, s grid, w values).
    """
    scale = alpha ** (-(p - 2) / 2)
    r0 = min(1e-4 * scale, 1e-4 * radius)
    # series start: v = alpha - alpha^{p-1} r^2/(2d)
    w = alpha - alpha ** (p - 1) * r0 * r0 / (2 * d)
    ws = -alpha ** (p - 1) * r0 * r0 / d
    s0, s1 = math.log(r0), math.log(radius)
    ds = (s1 - s0) / steps
    out_s = [s0]
    out_w = [w]

    def f(s, w, ws):
        return ws, -(d - 2) * ws - math.exp(2 * s) * abs(w) ** (p - 2) * w

    s = s0
    for _ in range(steps):
        k1w, k1s = f(s, w, ws)
        k2w, k2s = f(s + ds / 2, w + ds / 2 * k1w, ws + ds / 2 * k1s)
        k3w, k3s = f(s + ds / 2, w + ds / 2 * k2w, ws + ds / 2 * k2s)
        k4w, k4s = f(s + ds, w + ds * k3w, ws + ds * k3s)
        w_new = w + ds / 6 * (k1w + 2 * k2w + 2 * k3w + k4w)
        ws = ws + ds / 6 * (k1s + 2 * k2s + 2 * k3s + k4s)
        s += ds
        if w_new < 0:
            out_s.append(s)
            out_w.append(w_new)
            return True, w_new, out_s, out_w
        w = w_new
        out_s.append(s)
        out_w.append(w)
    return False, w, out_s, out_w


def shoot_radial(d: int, p: float, tol: float = 1e-10, radius: float = 1.0,
                 steps: int = 4000, max_shots: int = 400) -> RadialSolution:
    """Positive radial solution on the ball of the given radius, by bisection
    on the center value v(0)."""
    if d < 2:
        raise ValueError("need d >= 2")
    if not p > 2:
        raise ValueError("need p > 2")
    if d >= 3 and p >= critical_exponent(d, 0):
        raise NoSolutionError(
            f"no positive solution on a ball for p >= {critical_exponent(d, 0)} in dimension {d}")
    lo = 1e-3
    shots = 0
    while _shoot(lo, d, p, radius, steps)[0]:
        lo *= 0.1
        shots += 1
    hi = 1.0
    while not _shoot(hi, d, p, radius, steps)[0]:
        hi *= 2.0
        shots += 1
        if hi > 1e150:
            raise NoSolutionError("center value diverged while bracketing")
    best = None
    for _ in range(max_shots):
        mid = math.sqrt(lo * hi)
        crossed, end, ss, ws = _shoot(mid, d, p, radius, steps)
        shots += 1
        if not crossed:
            best = (mid, end, ss, ws)
            if abs(end) <= tol:
                break
            lo = mid
        else:
            hi = mid
        if hi / lo - 1 < 1e-15:
            break
    if best is None:
        best = (lo,) + _shoot(lo, d, p, radius, steps)[1:]
    alpha, end, ss, ws = best
    r = np.concatenate([[0.0], np.exp(ss)])
    v = np.concatenate([[alpha], ws])
    v[-1] = max(v[-1], 0.0)
    return RadialSolution(d, float(p), float(radius), float(alpha), r, v, float(abs(end)), shots)
