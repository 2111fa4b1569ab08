"""Profile domains, starshapedness predicates and the radial vector fields.

A profile domain is the low-dimensional generator Theta of a rotationally
symmetric domain.  It is represented by an ``inside`` predicate plus boundary
samples carrying outward unit normals and surface-measure weights, which is
all the predicates and boundary quadratures below need.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

TOL_EXACT = 1e-9
TOL_POLYGON = 1e-4
POLE_RADIUS = 1e-3
LINE_DENSITY = 256.0
AREA_DENSITY = 1024.0
MAX_SPHERE_SAMPLES = 20000


@dataclass(frozen=True)
class ProfileDomain:
    dimension: int
    kind: str
    parameters: dict
    inside: Callable[[np.ndarray], np.ndarray] | None
    points: np.ndarray
    normals: np.ndarray
    weights: np.ndarray
    bbox: tuple
    density: float = 1.0
    tol_geo: float = TOL_EXACT

    def __post_init__(self):
        for arr in (self.points, self.normals, self.weights):
            arr.setflags(write=False)

    @property
    def n_samples(self) -> int:
        return len(self.weights)

    def contains(self, x) -> np.ndarray:
        if self.inside is None:
            raise ValueError(f"profile of kind {self.kind!r} has no inside predicate")
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.asarray(self.inside(x), dtype=bool)

    def resample(self, factor: float) -> "ProfileDomain":
        return make_profile(self.kind, density=self.density * factor, **self.parameters)

    def boundary_measure(self) -> float:
        return float(np.sum(self.weights))

    def interior_samples(self, n: int, seed: int = 0) -> np.ndarray:
        """Uniform rejection samples from the interior."""
        rng = np.random.default_rng(seed)
        lo, hi = (np.asarray(b, dtype=float) for b in self.bbox)
        out = []
        count = 0
        while count < n:
            cand = rng.uniform(lo, hi, size=(max(4 * n, 64), self.dimension))
            cand = cand[self.contains(cand)]
            out.append(cand)
            count += len(cand)
        return np.concatenate(out)[:n]

    def to_json(self) -> dict:
        return {
            "dimension": self.dimension,
            "kind": self.kind,
            "parameters": _jsonable(self.parameters),
            "samples": [
                {"point": p.tolist(), "normal": nu.tolist(), "weight": float(w)}
                for p, nu, w in zip(self.points, self.normals, self.weights)
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "ProfileDomain":
        kind = data["kind"]
        params = dict(data.get("parameters", {}))
        inside = None
        tol = TOL_EXACT
        if kind in _GENERATORS:
            ref = make_profile(kind, **params)
            inside, tol = ref.inside, ref.tol_geo
        samples = data["samples"]
        pts = np.array([s["point"] for s in samples], dtype=float)
        nus = np.array([s["normal"] for s in samples], dtype=float)
        ws = np.array([s["weight"] for s in samples], dtype=float)
        lo, hi = pts.min(axis=0), pts.max(axis=0)
        return cls(int(data["dimension"]), kind, params, inside, pts, nus, ws,
                   (tuple(lo), tuple(hi)), tol_geo=tol)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def save_profile(profile: ProfileDomain, path) -> None:
    with open(path, "w") as fh:
        json.dump(profile.to_json(), fh, indent=1)


def load_profile(path) -> ProfileDomain:
    with open(path) as fh:
        return ProfileDomain.from_json(json.load(fh))


# -- sphere sampling ------------------------------------------------------------


def sphere_area(d: int, radius: float) -> float:
    """Measure of the (d-1)-sphere of the given radius in R^d."""
    return 2.0 * math.pi ** (d / 2) / math.gamma(d / 2) * radius ** (d - 1)


def _unit_sphere(d: int, n: int) -> np.ndarray:
    if d == 2:
        theta = 2 * np.pi * (np.arange(n) + 0.5) / n
        return np.stack([np.cos(theta), np.sin(theta)], axis=1)
    if d == 3:
        # Fibonacci lattice
        i = np.arange(n) + 0.5
        z = 1 - 2 * i / n
        r = np.sqrt(1 - z * z)
        phi = np.pi * (3 - np.sqrt(5)) * i
        return np.stack([z, r * np.cos(phi), r * np.sin(phi)], axis=1)
    g = np.random.default_rng(12345).normal(size=(n, d))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def _sphere_count(d: int, radius: float, density: float) -> int:
    if d == 2:
        n = LINE_DENSITY * density * 2 * np.pi * radius
    else:
        n = min(AREA_DENSITY * density * sphere_area(d, radius), MAX_SPHERE_SAMPLES * density)
    return max(int(math.ceil(n)), 16)


# -- generators -----------------------------------------------------------------


def _ball(center, radius, density=1.0):
    c = np.asarray(center, dtype=float)
    d = c.size
    if d < 2:
        raise ValueError("ball profile needs dimension >= 2")
    if not radius > 0:
        raise ValueError("radius must be positive")
    n = _sphere_count(d, radius, density)
    u = _unit_sphere(d, n)
    pts = c + radius * u
    w = np.full(n, sphere_area(d, radius) / n)
    r2 = radius * radius

    def inside(x):
        return np.sum((x - c) ** 2, axis=1) < r2

    bbox = (tuple(c - radius), tuple(c + radius))
    return d, inside, pts, u, w, bbox, TOL_EXACT


def _shell(center, inner, outer, density=1.0):
    c = np.asarray(center, dtype=float)
    d = c.size
    if not 0 < inner < outer:
        raise ValueError("shell needs 0 < inner < outer")
    parts = []
    for rad, sgn in ((outer, 1.0), (inner, -1.0)):
        n = _sphere_count(d, rad, density)
        u = _unit_sphere(d, n)
        parts.append((c + rad * u, sgn * u, np.full(n, sphere_area(d, rad) / n)))
    pts, nus, ws = (np.concatenate(z) for z in zip(*parts))

    def inside(x):
        r2 = np.sum((x - c) ** 2, axis=1)
        return (r2 > inner * inner) & (r2 < outer * outer)

    bbox = (tuple(c - outer), tuple(c + outer))
    return d, inside, pts, nus, ws, bbox, TOL_EXACT


def _segment_samples(a, b, density):
    a, b = np.asarray(a, float), np.asarray(b, float)
    length = float(np.linalg.norm(b - a))
    n = max(int(math.ceil(LINE_DENSITY * density * length)), 4)
    s = (np.arange(n) + 0.5) / n
    pts = a + s[:, None] * (b - a)
    tangent = (b - a) / length
    normal = np.array([tangent[1], -tangent[0]])  # outward for CCW traversal
    return pts, np.tile(normal, (n, 1)), np.full(n, length / n)


def _arc_samples(center, radius, th0, th1, density, outward=True):
    length = radius * (th1 - th0)
    n = max(int(math.ceil(LINE_DENSITY * density * length)), 4)
    th = th0 + (th1 - th0) * (np.arange(n) + 0.5) / n
    u = np.stack([np.cos(th), np.sin(th)], axis=1)
    return center + radius * u, (u if outward else -u), np.full(n, length / n)


def _annulus_sector(center, r_in, r_out, theta0, theta1, density=1.0):
    c = np.asarray(center, dtype=float)
    if c.size != 2:
        raise ValueError("annulus sector is a planar profile")
    if not (0 < r_in < r_out and 0 < theta1 - theta0 < 2 * np.pi):
        raise ValueError("need 0 < r_in < r_out and 0 < theta1 - theta0 < 2 pi")
    e0 = np.array([np.cos(theta0), np.sin(theta0)])
    e1 = np.array([np.cos(theta1), np.sin(theta1)])
    parts = [
        _arc_samples(c, r_out, theta0, theta1, density, outward=True),
        _arc_samples(c, r_in, theta0, theta1, density, outward=False),
    ]
    # radial edges: theta1 edge runs outward->... keep normals outward explicitly
    for e, sgn in ((e0, -1.0), (e1, 1.0)):
        p, _, w = _segment_samples(c + r_in * e, c + r_out * e, density)
        nrm = sgn * np.array([-e[1], e[0]])
        parts.append((p, np.tile(nrm, (len(p), 1)), w))
    pts, nus, ws = (np.concatenate(z) for z in zip(*parts))

    def inside(x):
        y = x - c
        r2 = np.sum(y * y, axis=1)
        th = np.mod(np.arctan2(y[:, 1], y[:, 0]) - theta0, 2 * np.pi)
        return (r2 > r_in ** 2) & (r2 < r_out ** 2) & (th > 0) & (th < theta1 - theta0)

    corners = np.array([c + r * e for r in (r_in, r_out) for e in (e0, e1)])
    lo = np.minimum(corners.min(axis=0), pts.min(axis=0))
    hi = np.maximum(corners.max(axis=0), pts.max(axis=0))
    return 2, inside, pts, nus, ws, (tuple(lo), tuple(hi)), TOL_EXACT


def _dumbbell(first_centers, radius, neck, dimension=2, density=1.0):
    """Two balls on the first axis joined by a cylindrical neck of half-width ``neck``."""
    c1, c2 = sorted(float(c) for c in first_centers)
    d = int(dimension)
    if not (0 < neck < radius and c2 - c1 > 2 * radius):
        raise ValueError("need 0 < neck < radius and disjoint balls")
    centers = [np.eye(d)[0] * c1, np.eye(d)[0] * c2]
    r2 = radius * radius

    def in_neck(x):
        return (x[:, 0] > c1) & (x[:, 0] < c2) & (np.sum(x[:, 1:] ** 2, axis=1) < neck * neck)

    def inside(x):
        return (np.sum((x - centers[0]) ** 2, axis=1) < r2) | \
               (np.sum((x - centers[1]) ** 2, axis=1) < r2) | in_neck(x)

    parts = []
    for c in centers:
        n = _sphere_count(d, radius, density)
        u = _unit_sphere(d, n)
        p = c + radius * u
        keep = ~in_neck(p)
        parts.append((p[keep], u[keep], np.full(keep.sum(), sphere_area(d, radius) / n)))
    # lateral neck surface between the two spheres
    x_lo = c1 + math.sqrt(r2 - neck * neck)
    x_hi = c2 - math.sqrt(r2 - neck * neck)
    length = x_hi - x_lo
    if d == 2:
        nx = max(int(math.ceil(LINE_DENSITY * density * length)), 4)
        xs = x_lo + length * (np.arange(nx) + 0.5) / nx
        for s in (1.0, -1.0):
            parts.append((np.stack([xs, np.full(nx, s * neck)], axis=1),
                          np.tile([0.0, s], (nx, 1)), np.full(nx, length / nx)))
    else:
        area = length * sphere_area(d - 1, neck)
        total = max(int(math.ceil(min(AREA_DENSITY * density * area, MAX_SPHERE_SAMPLES * density))), 16)
        nx = max(int(math.ceil(math.sqrt(total * length / (2 * np.pi * neck)))), 4)
        nt = max(total // nx, 8)
        xs = x_lo + length * (np.arange(nx) + 0.5) / nx
        u = _unit_sphere(d - 1, nt)
        p = np.concatenate([np.column_stack([np.full(nt, x), neck * u]) for x in xs])
        nu = np.concatenate([np.column_stack([np.zeros(nt), u]) for _ in xs])
        parts.append((p, nu, np.full(len(p), area / len(p))))
    pts, nus, ws = (np.concatenate(z) for z in zip(*parts))
    lo = np.full(d, -radius)
    hi = np.full(d, radius)
    lo[0], hi[0] = c1 - radius, c2 + radius
    return d, inside, pts, nus, ws, (tuple(lo), tuple(hi)), TOL_EXACT


def _polygon(vertices, density=1.0):
    v = np.asarray(vertices, dtype=float)
    if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
        raise ValueError("polygon needs at least three planar vertices")
    signed_area = 0.5 * np.sum(v[:, 0] * np.roll(v[:, 1], -1) - np.roll(v[:, 0], -1) * v[:, 1])
    if signed_area == 0:
        raise ValueError("degenerate polygon")
    if signed_area < 0:
        v = v[::-1]
    parts = [_segment_samples(v[i], v[(i + 1) % len(v)], density) for i in range(len(v))]
    pts, nus, ws = (np.concatenate(z) for z in zip(*parts))
    xs, ys = v[:, 0], v[:, 1]
    xn, yn = np.roll(xs, -1), np.roll(ys, -1)

    def inside(x):
        # even-odd crossing number
        px, py = x[:, 0:1], x[:, 1:2]
        cond = (ys > py) != (yn > py)
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = xs + (py - ys) * (xn - xs) / (yn - ys)
        odd = (np.sum(cond & (px < xint), axis=1) % 2) == 1
        # open set: points on an edge are outside
        ex, ey = xn - xs, yn - ys
        s = np.clip(((px - xs) * ex + (py - ys) * ey) / (ex * ex + ey * ey), 0.0, 1.0)
        dist2 = (px - xs - s * ex) ** 2 + (py - ys - s * ey) ** 2
        return odd & (dist2.min(axis=1) > (1e-12 * scale) ** 2)

    scale = float(np.max(np.abs(v))) or 1.0
    return 2, inside, pts, nus, ws, (tuple(v.min(axis=0)), tuple(v.max(axis=0))), TOL_POLYGON


_GENERATORS = {
    "ball": _ball,
    "shell": _shell,
    "annulus_sector": _annulus_sector,
    "dumbbell": _dumbbell,
    "polygon": _polygon,
}


def make_profile(kind: str, density: float = 1.0, **parameters) -> ProfileDomain:
    """Build a sampled profile domain.

    Kinds and parameters:

    * ``ball``: center, radius (any dimension >= 2)
    * ``shell``: center, inner, outer (spherical shell, any dimension)
    * ``annulus_sector``: center, r_in, r_out, theta0, theta1 (planar)
    * ``dumbbell``: first_centers, radius, neck, dimension
    * ``polygon``: vertices (planar, either orientation)

    ``density`` multiplies the default sampling density of 256 samples per
    unit length (curves) or 1024 per unit area (surfaces).
    """
    if kind not in _GENERATORS:
        raise ValueError(f"unknown profile kind {kind!r}")
    if not density > 0:
        raise ValueError("density must be positive")
    try:
        d, inside, pts, nus, ws, bbox, tol = _GENERATORS[kind](density=density, **parameters)
    except TypeError as exc:
        raise ValueError(f"bad parameters for {kind}: {exc}") from None
    params = _jsonable(parameters)
    return ProfileDomain(d, kind, params, inside, np.ascontiguousarray(pts),
                         np.ascontiguousarray(nus), np.ascontiguousarray(ws), bbox,
                         density=density, tol_geo=tol)


# -- radial fields ---------------------------------------------------------------


def phi(t, tau: float, k: int):
    """Solution of t phi'(t) + (k+1) phi(t) = 1 with phi(tau) = 0."""
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise ValueError("phi is defined for t > 0 only")
    if not tau > 0 or k < 0:
        raise ValueError("need tau > 0 and k >= 0")
    out = (1.0 - (tau / t) ** (k + 1)) / (k + 1)
    return float(out) if out.ndim == 0 else out


def phi_prime(t, tau: float, k: int):
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise ValueError("phi is defined for t > 0 only")
    out = tau ** (k + 1) / t ** (k + 2)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ChiParams:
    taus: tuple
    ks: tuple
    N: int

    def __post_init__(self):
        object.__setattr__(self, "taus", tuple(float(t) for t in self.taus))
        object.__setattr__(self, "ks", tuple(int(k) for k in self.ks))
        if len(self.taus) != len(self.ks) or not self.taus:
            raise ValueError("taus and multiplicities must have equal, nonzero length")
        if any(t <= 0 for t in self.taus):
            raise ValueError("taus must be positive")
        if any(k < 0 for k in self.ks):
            raise ValueError("multiplicities must be nonnegative")
        if self.k + self.m > self.N:
            raise ValueError("sum of block sizes k_i + 1 exceeds N")

    @property
    def m(self) -> int:
        return len(self.ks)

    @property
    def k(self) -> int:
        return sum(self.ks)

    @property
    def z_dim(self) -> int:
        return self.N - self.k - self.m

    def blocks(self):
        """Index slices of the y-blocks y^1..y^m, then of z."""
        out, start = [], 0
        for k in self.ks:
            out.append(slice(start, start + k + 1))
            start += k + 1
        return out, slice(start, self.N)


@dataclass(frozen=True)
class ChiValue:
    vector: np.ndarray
    divergence: float
    quad_bound: float


def chi_field(points: np.ndarray, params: ChiParams) -> np.ndarray:
    """The field (phi_1(|y^1|) y^1, ..., phi_m(|y^m|) y^m, z) on a batch of points."""
    x = np.atleast_2d(np.asarray(points, dtype=float))
    if x.shape[1] != params.N:
        raise ValueError(f"points must lie in R^{params.N}")
    out = x.copy()
    ys, _ = params.blocks()
    for sl, tau, k in zip(ys, params.taus, params.ks):
        r = np.linalg.norm(x[:, sl], axis=1)
        if np.any(r == 0):
            raise ValueError("chi is singular where a y-block vanishes")
        out[:, sl] = phi(r, tau, k)[:, None] * x[:, sl]
    return out


def chi_eval(point, params: ChiParams) -> ChiValue:
    x = np.asarray(point, dtype=float).reshape(-1)
    vec = chi_field(x[None, :], params)[0]
    ys, _ = params.blocks()
    bounds = [1.0]
    for sl, tau, k in zip(ys, params.taus, params.ks):
        bounds.append(1.0 - k * phi(float(np.linalg.norm(x[sl])), tau, k))
    return ChiValue(vec, float(params.N - params.k), max(bounds))


# -- starshapedness ---------------------------------------------------------------


@dataclass(frozen=True)
class StarshapeVerdict:
    passed: bool
    witnesses: list = field(default_factory=list)
    t0: float = float("nan")
    t1: float = float("nan")
    checked: int = 0
    skipped: int = 0

    def to_json(self) -> dict:
        return {"pass": self.passed, "t0": self.t0, "t1": self.t1, "checked": self.checked,
                "skipped": self.skipped, "witnesses": self.witnesses[:8],
                "n_witnesses": len(self.witnesses)}


def _pole_mask(points, poles):
    far = np.ones(len(points), dtype=bool)
    for xi in poles:
        far &= np.linalg.norm(points - xi, axis=1) > POLE_RADIUS
    return far


def _witnesses(points, values, mask, condition, limit=64):
    idx = np.flatnonzero(mask)
    order = idx[np.argsort(values[idx])][:limit]
    return [{"point": points[i].tolist(), "value": float(values[i]), "condition": condition}
            for i in order]


def doubly_starshaped_check(profile: ProfileDomain, t0: float, t1: float,
                            tol: float | None = None) -> StarshapeVerdict:
    """Sampled test that Theta lies in t0 < t < t1 and is strictly starshaped
    with respect to both (t0, 0) and (t1, 0)."""
    if not 0 < t0 < t1:
        raise ValueError("need 0 < t0 < t1")
    tol = profile.tol_geo if tol is None else tol
    x, nu = profile.points, profile.normals
    d = profile.dimension
    witnesses = []
    t = x[:, 0]
    bad = (t < t0 - tol) | (t > t1 + tol)
    witnesses += _witnesses(x, np.minimum(t - t0, t1 - t), bad, "first coordinate outside [t0, t1]")
    poles = [np.eye(d)[0] * t0, np.eye(d)[0] * t1]
    skipped = 0
    for i, xi in enumerate(poles):
        far = _pole_mask(x, [xi])
        skipped += int(np.sum(~far))
        vals = np.sum((x - xi) * nu, axis=1)
        witnesses += _witnesses(x, vals, far & (vals <= tol), f"<x - xi_{i}, nu> <= tol")
    return StarshapeVerdict(not witnesses, witnesses, float(t0), float(t1), len(x), skipped)


def flux_values(points: np.ndarray, normals: np.ndarray, taus, ks) -> np.ndarray:
    """<(phi_1(x_1) x_1, ..., phi_m(x_m) x_m, z), nu> at profile boundary samples."""
    v = np.array(points, dtype=float)
    for i, (tau, k) in enumerate(zip(taus, ks)):
        if np.any(v[:, i] <= 0):
            raise ValueError("profile must lie in the open positive orthant of the first coordinates")
        v[:, i] = phi(points[:, i], tau, k) * points[:, i]
    return np.sum(v * normals, axis=1)


def boundary_flux_check(profile: ProfileDomain, params: ChiParams, t1: float | None = None,
                        tol: float | None = None) -> StarshapeVerdict:
    """Positivity of <(phi(t) t, z), nu> on the boundary away from the poles (tau, 0), (t1, 0)."""
    if params.m != 1:
        raise NotImplementedError("boundary flux check supports a single rotation block (m = 1)")
    tol = profile.tol_geo if tol is None else tol
    tau = params.taus[0]
    x, nu = profile.points, profile.normals
    e = np.eye(profile.dimension)[0]
    poles = [e * tau] + ([e * t1] if t1 is not None else [])
    far = _pole_mask(x, poles)
    if np.any(x[:, 0] <= 0):
        vals = np.full(len(x), -np.inf)
        ok = x[:, 0] > 0
        vals[ok] = flux_values(x[ok], nu[ok], params.taus, params.ks)
    else:
        vals = flux_values(x, nu, params.taus, params.ks)
    wit = _witnesses(x, vals, far & (vals <= tol), "<(phi(t) t, z), nu> <= tol")
    return StarshapeVerdict(not wit, wit, float(tau), float("nan") if t1 is None else float(t1),
                            len(x), int(np.sum(~far)))


# -- ball radius for the product field -----------------------------------------------------------


def rho_equation(rho: float, params: ChiParams) -> float:
    return max(1.0 - k * phi(tau - rho, tau, k) for tau, k in zip(params.taus, params.ks))


def solve_rho(alpha: float, params: ChiParams, tol: float = 1e-13) -> float:
    """The radius rho in (0, min tau) with max_i {1 - k_i phi_i(tau_i - rho)} = alpha."""
    upper = (params.N - params.k) / 2
    if not 1 < alpha < upper:
        raise ValueError(f"alpha must lie in (1, {upper})")
    lo, hi = 0.0, min(params.taus)
    f = lambda r: rho_equation(r, params) - alpha
    # the equation blows up only through blocks with k_i >= 1 at their own tau_i
    probe = hi * (1 - 1e-15)
    if f(probe) < 0:
        raise ValueError("no admissible rho below min(tau): equation never reaches alpha")
    rho = 0.5 * (lo + hi)
    for _ in range(400):
        rho = 0.5 * (lo + hi)
        val = f(rho)
        if abs(val) <= tol:
            break
        if val < 0:
            lo = rho
        else:
            hi = rho
        if hi - lo <= 4 * np.finfo(float).eps * hi:
            break
    return rho


# -- coefficient monotonicity --------------------------------------------------------


@dataclass(frozen=True)
class MonotonicityVerdict:
    passed: bool
    witnesses: list
    checked: int
    max_y_term: float
    max_z_term: float

    def to_json(self) -> dict:
        return {"pass": self.passed, "checked": self.checked, "max_y_term": self.max_y_term,
                "max_z_term": self.max_z_term, "witnesses": self.witnesses[:8],
                "n_witnesses": len(self.witnesses)}


def K_monotonicity_check(K: Callable, gradK: Callable, samples, y_dim: int,
                         tol: float = TOL_EXACT, fd_checks: int = 8,
                         fd_step: float = 1e-6) -> MonotonicityVerdict:
    """Check <y, d_y K> <= 0 and <z, d_z K> <= 0 at sample points (y, z).

    ``K`` maps a batch (n, N) to (n,), ``gradK`` maps it to (n, N).  A few
    samples are used to confirm ``gradK`` against central differences of ``K``.
    """
    x = np.atleast_2d(np.asarray(samples, dtype=float))
    g = np.asarray(gradK(x), dtype=float).reshape(x.shape)
    for i in np.linspace(0, len(x) - 1, min(fd_checks, len(x))).astype(int):
        fd = np.empty(x.shape[1])
        for j in range(x.shape[1]):
            e = np.zeros(x.shape[1])
            e[j] = fd_step * max(1.0, abs(x[i, j]))
            fd[j] = (K((x[i] + e)[None])[0] - K((x[i] - e)[None])[0]) / (2 * e[j])
        scale = max(np.max(np.abs(g[i])), np.max(np.abs(fd)), abs(float(K(x[i][None])[0])), 1e-300)
        if np.max(np.abs(fd - g[i])) > 0.01 * scale:
            raise ValueError(f"gradK inconsistent with K at sample {i}")
    yt = np.sum(x[:, :y_dim] * g[:, :y_dim], axis=1)
    zt = np.sum(x[:, y_dim:] * g[:, y_dim:], axis=1)
    wit = _witnesses(x, -yt, yt > tol, "<y, d_y K> > tol") + \
        _witnesses(x, -zt, zt > tol, "<z, d_z K> > tol")
    return MonotonicityVerdict(not wit, wit, len(x), float(yt.max()), float(zt.max()) if x.shape[1] > y_dim else 0.0)
