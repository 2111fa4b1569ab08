"""Reduced problems: critical exponents, Hopf and rotational reductions, lifting,
and Palais-Smale / level bookkeeping."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .algebra import ORACLE_DILATION, DilationModel, dilation_sq_array, fd_laplacian, hopf_map_array
from .geometry import ProfileDomain

INF = math.inf


def critical_exponent(N: int, k: int = 0) -> float:
    """2(N-k)/(N-k-2), or ``INF`` when N - k <= 2."""
    if N < 3:
        raise ValueError("critical exponent needs N >= 3")
    if not 0 <= k <= N:
        raise ValueError("need 0 <= k <= N")
    n = N - k
    if n <= 2:
        return INF
    return 2.0 * n / (n - 2)


@dataclass(frozen=True)
class WeightedEllipticProblem:
    """-div(a grad v) + c0 v = Q |v|^{p-2} v on the domain, v = 0 on its boundary.

    ``weight``, ``coefficient`` and ``linear`` act on batches of points of
    shape (n, d).  ``coefficient_grad`` is optional and only used by the
    Pohozaev quadrature.
    """

    domain: ProfileDomain
    weight: Callable
    coefficient: Callable
    p: float
    linear: Callable | None = None
    coefficient_grad: Callable | None = None
    label: str = "weighted"
    meta: dict | None = None

    def __post_init__(self):
        if not self.p > 2:
            raise ValueError("exponent must exceed 2")
        pts = self.domain.points
        if self.domain.inside is not None:
            pts = np.concatenate([pts, self.domain.interior_samples(256)])
        if np.any(np.asarray(self.weight(pts)) <= 0) or np.any(np.asarray(self.coefficient(pts)) <= 0):
            raise ValueError("a and Q must be strictly positive on the closed domain")

    @property
    def dimension(self) -> int:
        return self.domain.dimension

    def with_exponent(self, p: float) -> "WeightedEllipticProblem":
        return WeightedEllipticProblem(self.domain, self.weight, self.coefficient, p, self.linear,
                                       self.coefficient_grad, self.label, self.meta)


def _one(x):
    return np.ones(len(x))


def _zero_grad(x):
    return np.zeros_like(np.asarray(x, dtype=float))


def plain_problem(domain: ProfileDomain, p: float) -> WeightedEllipticProblem:
    """-Lap v = |v|^{p-2} v."""
    return WeightedEllipticProblem(domain, _one, _one, p, coefficient_grad=_zero_grad, label="plain")


def hopf_reduce(U: ProfileDomain, a: float, p: float,
                model: DilationModel = ORACLE_DILATION) -> WeightedEllipticProblem:
    """-Lap v + a/(c|x|) v = 1/(c|x|) |v|^{p-2} v on U, c the dilation constant."""
    if U.dimension not in (2, 3, 5, 9):
        raise ValueError("Hopf-reduced domains live in R^{dim K + 1}, dim K in {1, 2, 4, 8}")
    origin = np.zeros((1, U.dimension))
    if (U.inside is not None and U.contains(origin)[0]) or np.min(np.linalg.norm(U.points, axis=1)) == 0:
        raise ValueError("the reduced domain must not contain the origin")
    c = model.constant

    def Q(x):
        return 1.0 / (c * np.linalg.norm(x, axis=1))

    def gradQ(x):
        r = np.linalg.norm(x, axis=1)
        return -x / (c * r[:, None] ** 3)

    linear = None
    if a != 0:
        def linear(x):
            return a / (c * np.linalg.norm(x, axis=1))

    return WeightedEllipticProblem(U, _one, Q, p, linear, gradQ, label="hopf",
                                   meta={"a": float(a), "dilation_constant": c,
                                         "algebra_dim": U.dimension - 1})


def lift(v, model: DilationModel = ORACLE_DILATION, order: int = 1) -> Callable:
    """u(z) = v(pi(z)) on pi^{-1}(U).

    ``v`` is a grid Field (interpolated with the given order, domain-checked) or
    any batch callable on R^{dim K + 1}.
    """
    def u(z):
        z = np.atleast_2d(np.asarray(z, dtype=float))
        x = hopf_map_array(z)
        if hasattr(v, "evaluate"):
            return v.evaluate(x, order=order)
        return np.asarray(v(x), dtype=float)

    u.model = model
    return u


@dataclass(frozen=True)
class ResidualTransfer:
    lifted: np.ndarray
    predicted: np.ndarray
    dilation_sq: np.ndarray
    reduced: np.ndarray

    @property
    def relative_error(self) -> np.ndarray:
        return np.abs(self.lifted - self.predicted) / np.abs(self.predicted)


def residual_transfer(v, problem: WeightedEllipticProblem, z_points, h_fd: float = 1e-4,
                      order: int = 5) -> ResidualTransfer:
    """Compare the lifted residual -Lap u + a u - |u|^{p-2} u at points z with
    lambda^2(z) times the reduced residual at pi(z), both by central differences.

    ``problem`` is a Hopf-reduced problem; ``v`` a grid Field or batch callable.
    """
    if problem.label != "hopf":
        raise ValueError("residual transfer needs a Hopf-reduced problem")
    model = DilationModel(problem.meta["dilation_constant"])
    a, p = problem.meta["a"], problem.p
    z = np.atleast_2d(np.asarray(z_points, dtype=float))
    u = lift(v, model, order=order)
    vf = (lambda x: v.evaluate(x, order=order)) if hasattr(v, "evaluate") else v
    x = hopf_map_array(z)
    uz = u(z)
    vx = vf(x)
    lap_u = np.array([fd_laplacian(u, zi, h_fd) for zi in z])
    lap_v = np.array([fd_laplacian(vf, xi, h_fd) for xi in x])
    lifted = -lap_u + a * uz - np.abs(uz) ** (p - 2) * uz
    c0 = 0.0 if problem.linear is None else problem.linear(x)
    reduced = -lap_v + c0 * vx - problem.coefficient(x) * np.abs(vx) ** (p - 2) * vx
    dil = dilation_sq_array(z, model)
    return ResidualTransfer(lifted, dil * reduced, dil, reduced)


@dataclass(frozen=True)
class RotationalSpec:
    """Omega = {(y^1..y^m, z): (|y^1|..|y^m|, z) in Theta} in R^N.

    ``K`` and ``gradK`` are given in profile coordinates (t_1..t_m, z).
    """

    ks: tuple
    N: int
    profile: ProfileDomain
    K: Callable | None = None
    gradK: Callable | None = None

    def __post_init__(self):
        object.__setattr__(self, "ks", tuple(int(k) for k in self.ks))
        if any(k < 0 for k in self.ks) or not self.ks:
            raise ValueError("multiplicities must be nonnegative and nonempty")
        if self.profile.dimension != self.N - self.k:
            raise ValueError(f"profile must live in R^(N-k) = R^{self.N - self.k}")
        if len(self.ks) > self.profile.dimension:
            raise ValueError("more rotation blocks than profile coordinates")

    @property
    def m(self) -> int:
        return len(self.ks)

    @property
    def k(self) -> int:
        return sum(self.ks)

    def K_profile(self, x):
        return _one(x) if self.K is None else np.asarray(self.K(x), dtype=float)

    def gradK_profile(self, x):
        return _zero_grad(x) if self.gradK is None else np.asarray(self.gradK(x), dtype=float)

    def to_ambient(self, profile_points, seed: int = 0) -> np.ndarray:
        """Random preimages in R^N of profile points (|y^i| = x_i)."""
        x = np.atleast_2d(np.asarray(profile_points, dtype=float))
        rng = np.random.default_rng(seed)
        cols = []
        for i, k in enumerate(self.ks):
            u = rng.normal(size=(len(x), k + 1))
            u /= np.linalg.norm(u, axis=1, keepdims=True)
            cols.append(x[:, i:i + 1] * u)
        cols.append(x[:, self.m:])
        return np.concatenate(cols, axis=1)

    def to_profile(self, ambient) -> np.ndarray:
        y = np.atleast_2d(np.asarray(ambient, dtype=float))
        cols, start = [], 0
        for k in self.ks:
            cols.append(np.linalg.norm(y[:, start:start + k + 1], axis=1, keepdims=True))
            start += k + 1
        cols.append(y[:, start:])
        return np.concatenate(cols, axis=1)

    def K_ambient(self, y):
        return self.K_profile(self.to_profile(y))

    def gradK_ambient(self, y):
        """Chain rule: d_{y^i} K = (d_{t_i} K~) y^i/|y^i|, d_z K = d_z K~."""
        y = np.atleast_2d(np.asarray(y, dtype=float))
        g = self.gradK_profile(self.to_profile(y))
        out, start = [], 0
        for i, k in enumerate(self.ks):
            blk = y[:, start:start + k + 1]
            r = np.linalg.norm(blk, axis=1, keepdims=True)
            out.append(g[:, i:i + 1] * blk / r)
            start += k + 1
        out.append(g[:, self.m:])
        return np.concatenate(out, axis=1)


def symmetry_reduce(spec: RotationalSpec, p: float) -> WeightedEllipticProblem:
    """-div(a grad v) = Q |v|^{p-2} v on Theta with a = prod x_i^{k_i}, Q = a K."""
    samples = spec.profile.points
    if spec.profile.inside is not None:
        samples = np.concatenate([samples, spec.profile.interior_samples(256)])
    if np.any(samples[:, :spec.m] <= 0):
        raise ValueError("profile must have strictly positive rotation coordinates")
    ks = np.array(spec.ks, dtype=float)

    def a(x):
        return np.prod(x[:, :spec.m] ** ks, axis=1)

    def Q(x):
        return a(x) * spec.K_profile(x)

    return WeightedEllipticProblem(spec.profile, a, Q, p, label="rotational",
                                   meta={"ks": list(spec.ks), "N": spec.N})


# -- Palais-Smale threshold and level bounds -------------------------------------


@dataclass(frozen=True)
class OrbitData:
    """min over the closed domain of #Gx / K(x)^{(M-2)/2}, Sobolev constant S, dimension M."""

    min_orbit_weight: float
    M: int
    sobolev_constant: float = 1.0

    def __post_init__(self):
        if not self.min_orbit_weight > 0 or not self.sobolev_constant > 0:
            raise ValueError("orbit weight and Sobolev constant must be positive")
        if self.M < 1:
            raise ValueError("dimension M must be positive")

    @property
    def unit_level(self) -> float:
        """S^{M/2} / M."""
        return self.sobolev_constant ** (self.M / 2) / self.M


def ps_threshold(orbit: OrbitData) -> float:
    if math.isinf(orbit.min_orbit_weight):
        return INF
    return orbit.min_orbit_weight * orbit.unit_level


@dataclass(frozen=True)
class LevelBound:
    c_upper: float
    ell_upper: float


def level_bound(energies: Sequence[float], orbit: OrbitData) -> LevelBound:
    """Upper bounds for c_k and l_k from mountain-pass energies of k disjoint subdomains."""
    e = [float(x) for x in energies]
    if not e:
        raise ValueError("need at least one subdomain energy")
    if any(x <= 0 for x in e):
        raise ValueError("mountain-pass energies are positive")
    c = math.fsum(e)
    return LevelBound(c, c / orbit.unit_level)


def hopf_multiplicity_terms(orbit_count: float, U: ProfileDomain, algebra_dim: int,
                            ell_upper: float) -> dict:
    """Left side min(#Gx)|x|^{(dim K - 1)/2} next to an empirical upper bound of l_m.

    No verdict is drawn: l_m itself is not computable here.
    """
    r = np.linalg.norm(U.points, axis=1)
    lhs = float(orbit_count * np.min(r) ** ((algebra_dim - 1) / 2))
    return {"lhs": lhs, "ell_upper": float(ell_upper)}
