"""Nonexistence and existence certificates, and a quadrature of the Pucci-Serrin
identity for discrete solutions.

A certificate records every hypothesis check by name.  The verdict is a pure
function of that record, the exponent and the threshold, so re-running with
the echoed parameters reproduces it exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .algebra import ORACLE_DILATION, DilationModel
from .geometry import (ChiParams, ProfileDomain, boundary_flux_check, chi_eval, chi_field,
                       doubly_starshaped_check, flux_values, K_monotonicity_check, make_profile,
                       phi, phi_prime, rho_equation, solve_rho)
from .reduction import INF, RotationalSpec, critical_exponent

NONEXISTENCE = "NONEXISTENCE"
EXISTENCE_SUBCRITICAL = "EXISTENCE_SUBCRITICAL"
INCONCLUSIVE = "INCONCLUSIVE"

ALPHA_MARGIN = 1e-9
RHO_TOL = 1e-10
REVALIDATION_FACTOR = 4
INTERIOR_SAMPLES = 512


class HypothesisError(ValueError):
    """The theorem's standing hypotheses cannot be met by the given parameters."""


# -- Pucci-Serrin quadrature ---------------------------------------------------------


@dataclass(frozen=True)
class PohozaevTerms:
    boundary: float
    div: float
    gradK: float
    dchi: float
    samples: int = 0

    @property
    def residual(self) -> float:
        return self.boundary - (self.div + self.gradK + self.dchi)

    @property
    def relative_residual(self) -> float:
        return abs(self.residual) / abs(self.boundary) if self.boundary else abs(self.residual)

    def to_json(self) -> dict:
        return {"boundaryTerm": self.boundary, "divTerm": self.div, "gradKTerm": self.gradK,
                "dchiTerm": self.dchi, "residual": self.residual,
                "relativeResidual": self.relative_residual, "boundarySamples": self.samples}


def _chi(kind: str, params: ChiParams | None, x: np.ndarray):
    """(chi, div chi, d chi) at a batch of points."""
    n, d = x.shape
    if kind == "identity":
        return x.copy(), np.full(n, float(d)), np.broadcast_to(np.eye(d), (n, d, d))
    if kind != "product":
        raise ValueError("chi kind must be 'identity' or 'product'")
    if params is None or params.N != d:
        raise ValueError(f"product field needs ChiParams with N = {d}")
    vec = chi_field(x, params)
    jac = np.zeros((n, d, d))
    ys, zs = params.blocks()
    for sl, tau, k in zip(ys, params.taus, params.ks):
        y = x[:, sl]
        r = np.linalg.norm(y, axis=1)
        size = y.shape[1]
        jac[:, sl, sl] = (phi(r, tau, k)[:, None, None] * np.eye(size)
                          + (phi_prime(r, tau, k) / r)[:, None, None] * y[:, :, None] * y[:, None, :])
    idx = np.arange(zs.start, zs.stop)
    jac[:, idx, idx] = 1.0
    return vec, np.full(n, float(params.N - params.k)), jac


def _lagrange_cubic(field, x: np.ndarray) -> np.ndarray:
    """Tensor cubic Lagrange interpolation from inside nodes only."""
    g = field.grid
    arr = field.to_array()
    mask = g.mask
    s = (x - g.center) / g.h + g.m
    base = np.floor(s).astype(int) - 1
    frac = s - (base + 1)
    nodes = np.array([-1.0, 0.0, 1.0, 2.0])
    # weights[i, axis, j] for node offset j
    w = np.ones((len(x), g.dim, 4))
    for j in range(4):
        for l in range(4):
            if l != j:
                w[:, :, j] *= (frac - nodes[l]) / (nodes[j] - nodes[l])
    out = np.zeros(len(x))
    for offs in np.ndindex(*(4,) * g.dim):
        idx = tuple(base[:, a] + offs[a] for a in range(g.dim))
        if not np.all(mask[idx]):
            raise ValueError("interpolation stencil leaves the grid interior; refine the grid")
        wt = np.ones(len(x))
        for a in range(g.dim):
            wt *= w[:, a, offs[a]]
        out += wt * arr[idx]
    return out


def boundary_normal_derivative(field, points: np.ndarray, normals: np.ndarray,
                               offset: float = 3.0) -> np.ndarray:
    """Outward normal derivative at boundary points where the field vanishes.

    Values at distances delta, 2 delta, 3 delta along the inward normal
    (delta = offset h) and the boundary zero give a third-order one-sided
    difference.
    """
    delta = offset * field.grid.h
    u = [_lagrange_cubic(field, points - j * delta * normals) for j in (1, 2, 3)]
    inward = (18 * u[0] - 9 * u[1] + 2 * u[2]) / (6 * delta)
    return -inward


def pohozaev_terms(report, chi_kind: str = "identity", params: ChiParams | None = None,
                   K=None, gradK=None) -> PohozaevTerms:
    """Quadrature of boundary = div + gradK + dchi for a converged planar solve of
    -Lap u = K |u|^{p-2} u.

    K and gradK default to the problem's coefficient and its gradient.
    """
    if not report.converged:
        raise ValueError("Pohozaev terms need a converged solve")
    problem = report.problem
    g = report.field.grid
    if g.dim != 2:
        raise ValueError("Pohozaev quadrature supports planar fixtures")
    if problem.label not in ("plain",) and K is None:
        raise ValueError("quadrature assumes the unweighted operator -Lap")
    K = K or problem.coefficient
    gradK = gradK or problem.coefficient_grad
    p = problem.p
    u = report.field.values
    x = g.points
    cv = g.cell_volume
    if not np.any(u):
        return PohozaevTerms(0.0, 0.0, 0.0, 0.0, 0)
    grad = g.gradient(u)
    chi, div, jac = _chi(chi_kind, params, x)
    Kx = np.asarray(K(x), dtype=float)
    up = np.abs(u) ** p
    g2 = np.sum(grad * grad, axis=1)
    div_term = cv * np.sum(div * (Kx * up / p - 0.5 * g2))
    if gradK is None:
        gk_term = 0.0
    else:
        gk = np.asarray(gradK(x), dtype=float)
        gk_term = 0.0 if not np.any(gk) else cv * np.sum(up * np.sum(chi * gk, axis=1)) / p
    dchi_term = cv * np.sum(np.einsum("ni,nij,nj->n", grad, jac, grad))
    prof = g.profile
    dn = boundary_normal_derivative(report.field, prof.points, prof.normals)
    chi_b = _chi(chi_kind, params, prof.points)[0]
    bnd = 0.5 * np.sum(prof.weights * dn * dn * np.sum(chi_b * prof.normals, axis=1))
    return PohozaevTerms(float(bnd), float(div_term), float(gk_term), float(dchi_term), len(prof.points))


def _rational(x: float) -> Fraction:
    """Exact value of x, snapped to a small-denominator rational when x is its rounding."""
    exact = Fraction(x)
    snap = exact.limit_denominator(10**9)
    return snap if abs(float(snap) - x) <= 4 * math.ulp(x) else exact


def final_inequality(grad_integral: float, N: int, k: int, p: float, alpha: float = 1.0) -> float:
    """(N-k)(1/p - 1/2 + alpha/(N-k)) times the gradient integral, in exact rationals."""
    if not grad_integral > 0:
        raise ValueError("gradient integral must be positive")
    if N - k < 3:
        raise ValueError("need N - k >= 3")
    n = Fraction(N - k)
    val = n * (1 / _rational(p) - Fraction(1, 2) + _rational(alpha) / n) * Fraction(grad_integral)
    return float(val)


# -- certificates ---------------------------------------------------------------------


@dataclass(frozen=True)
class Certificate:
    verdict: str
    theorem: str
    checks: dict
    threshold_exponent: float
    parameters: dict
    scope: str = "all solutions"
    existence_threshold: float | None = None

    @property
    def failed(self) -> list:
        return sorted(name for name, c in self.checks.items() if not c["pass"])

    def to_json(self) -> dict:
        out = {
            "checks": self.checks,
            "failedChecks": self.failed,
            "parameters": self.parameters,
            "scope": self.scope,
            "theorem": self.theorem,
            "thresholdExponent": self.threshold_exponent,
            "verdict": self.verdict,
        }
        if self.existence_threshold is not None:
            out["existenceThreshold"] = self.existence_threshold
        return out


def decide(checks: dict, p: float, nonexistence_from: float, existence_below: float) -> str:
    """NONEXISTENCE needs every check and p >= threshold; EXISTENCE_SUBCRITICAL needs
    every check and 2 < p < existence bound."""
    if not all(c["pass"] for c in checks.values()):
        return INCONCLUSIVE
    if p >= nonexistence_from:
        return NONEXISTENCE
    if 2 < p < existence_below:
        return EXISTENCE_SUBCRITICAL
    return INCONCLUSIVE


def _exponent_check(p, threshold):
    return {"pass": True, "p": float(p), "threshold": threshold,
            "relation": "above" if p >= threshold else "below"}


def _merge_revalidated(first, second):
    """A geometric check passes only if it passes at base and at refined density."""
    out = first.to_json()
    out["pass"] = bool(first.passed and second.passed)
    out["revalidated"] = {"checked": second.checked, "pass": bool(second.passed),
                          "n_witnesses": len(second.witnesses),
                          "witnesses": second.witnesses[:8]}
    return out


def _profile_samples(profile: ProfileDomain, seed: int = 0) -> np.ndarray:
    pts = profile.points
    if profile.inside is not None:
        pts = np.concatenate([pts, profile.interior_samples(INTERIOR_SAMPLES, seed=seed)])
    return pts


def _starshape_and_flux(profile, t0, t1, ks, N):
    refined = profile.resample(REVALIDATION_FACTOR)
    star = _merge_revalidated(doubly_starshaped_check(profile, t0, t1),
                              doubly_starshaped_check(refined, t0, t1))
    params = ChiParams((t0,), ks, N)
    flux = _merge_revalidated(boundary_flux_check(profile, params, t1=t1),
                              boundary_flux_check(refined, params, t1=t1))
    return star, flux


def certify_theorem1(spec: RotationalSpec, p: float, t0: float, t1: float,
                     seed: int = 0) -> Certificate:
    """Doubly starshaped profile with a single rotation block."""
    if spec.m != 1:
        raise HypothesisError("this certificate covers a single rotation block (m = 1)")
    N, k = spec.N, spec.k
    if k > N - 3:
        raise HypothesisError(f"need k <= N - 3, got k = {k}, N = {N}")
    threshold = critical_exponent(N, k)
    star, flux = _starshape_and_flux(spec.profile, t0, t1, spec.ks, N)
    amb = spec.to_ambient(_profile_samples(spec.profile, seed), seed=seed)
    mono = K_monotonicity_check(spec.K_ambient, spec.gradK_ambient, amb, y_dim=k + 1).to_json()
    checks = {"starshape": star, "flux": flux, "K_monotonicity": mono,
              "exponent": _exponent_check(p, threshold)}
    params = {"N": N, "ks": list(spec.ks), "p": float(p), "t0": float(t0), "t1": float(t1),
              "profile": {"kind": spec.profile.kind,
                          "parameters": _plain(spec.profile.parameters)},
              "seed": int(seed)}
    return Certificate(decide(checks, p, threshold, threshold), "theorem-1.2", checks, threshold, params)


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def admissible_alpha(N: int, k: int, epsilon: float) -> float:
    """Largest alpha in (1, (N-k)/2) with 2(N-k)/(N-k-2 alpha) <= 2*_{N,k} + epsilon, minus a margin."""
    n = N - k
    target = critical_exponent(N, k) + epsilon
    alpha = min(n / 2 - ALPHA_MARGIN, n / 2 * (1 - 2 / target)) - ALPHA_MARGIN
    if not alpha > 1:
        raise HypothesisError(f"no admissible alpha in (1, {n / 2}) for epsilon = {epsilon}")
    return alpha


def certify_theorem4(ks, taus, epsilon: float, p: float, N: int, samples: int = 2048):
    """Ball profile of radius rho about (tau_1, ..., tau_m, 0).  Returns (certificate, profile)."""
    ks = tuple(int(x) for x in ks)
    taus = tuple(float(t) for t in taus)
    k = sum(ks)
    if k > N - 3:
        raise HypothesisError(f"need k <= N - 3, got k = {k}, N = {N}")
    if not epsilon > 0:
        raise HypothesisError("epsilon must be positive")
    params = ChiParams(taus, ks, N)
    threshold = critical_exponent(N, k)
    target = threshold + epsilon
    alpha = admissible_alpha(N, k, epsilon)
    rho = solve_rho(alpha, params)
    rho_res = rho_equation(rho, params) - alpha
    dim = N - k
    center = np.zeros(dim)
    center[:len(taus)] = taus
    profile = make_profile("ball", center=center.tolist(), radius=rho)
    # profile coordinates (t_1..t_m, z): the quadratic bound of d chi is max_i 1 - k_i phi_i(t_i)
    pts = _profile_samples(profile)
    qb = np.ones(len(pts))
    for i, (tau, kk) in enumerate(zip(taus, ks)):
        qb = np.maximum(qb, 1 - kk * phi(pts[:, i], tau, kk))
    flux = flux_values(profile.points, profile.normals, taus, ks)
    checks = {
        "alpha": {"pass": bool(1 < alpha < dim / 2), "alpha": alpha,
                  "implied_threshold": 2 * dim / (dim - 2 * alpha), "target": target},
        "rho": {"pass": bool(abs(rho_res) <= RHO_TOL and 0 < rho < min(taus)), "rho": rho,
                "residual": rho_res, "tol": RHO_TOL},
        "dchi_bound": {"pass": bool(qb.max() <= alpha + 1e-9), "max": float(qb.max()),
                       "alpha": alpha, "checked": len(pts)},
        "flux": {"pass": bool(flux.min() > 0), "min": float(flux.min()), "checked": len(flux)},
        "exponent": _exponent_check(p, target),
    }
    echo = {"N": N, "ks": list(ks), "taus": list(taus), "epsilon": float(epsilon), "p": float(p)}
    cert = Certificate(decide(checks, p, target, threshold), "theorem-1.3", checks, target, echo,
                       existence_threshold=threshold)
    return cert, profile


def certify_hopf(profile: ProfileDomain, n: int, p: float, algebra_dim: int,
                 model: DilationModel = ORACLE_DILATION, t0: float | None = None,
                 t1: float | None = None, seed: int = 0) -> Certificate:
    """Invariant-class certificate for the Hopf-reduced problem with profile Theta_n.

    U = {(y, z) in R^{n+1} x R^{dim K - n}: (|y|, z) in Theta_n} carries
    -Lap v = K |v|^{p-2} v with K(x) = 1/(c |x|).
    """
    if algebra_dim not in (2, 4, 8):
        raise ValueError("algebra dimension must be 2, 4 or 8")
    if not 0 <= n <= algebra_dim - 2:
        raise ValueError(f"need 0 <= n <= {algebra_dim - 2}")
    if profile.dimension != algebra_dim - n + 1:
        raise ValueError(f"profile must live in R^{algebra_dim - n + 1}")
    N, k = 2 * algebra_dim, algebra_dim - 1 + n
    threshold = critical_exponent(N, k)
    lo, hi = profile.bbox
    t0 = float(lo[0]) if t0 is None else float(t0)
    t1 = float(hi[0]) if t1 is None else float(t1)
    if not t0 > 0:
        raise HypothesisError("profile must stay away from the rotation axis")
    c = model.constant

    def K(x):
        return 1.0 / (c * np.linalg.norm(x, axis=1))

    def gradK(x):
        r = np.linalg.norm(x, axis=1)
        return -x / (c * r[:, None] ** 3)

    reduced = RotationalSpec((n,), algebra_dim + 1, profile)
    star, flux = _starshape_and_flux(profile, t0, t1, (n,), algebra_dim + 1)
    amb = reduced.to_ambient(_profile_samples(profile, seed), seed=seed)
    mono = K_monotonicity_check(K, gradK, amb, y_dim=n + 1).to_json()
    radial = np.sum(amb * gradK(amb), axis=1) + K(amb)
    mono["radial_identity_max_error"] = float(np.max(np.abs(radial)))
    mono["pass"] = bool(mono["pass"] and mono["radial_identity_max_error"] <= 1e-12 * float(np.max(K(amb))))
    checks = {"starshape": star, "flux": flux, "K_monotonicity": mono,
              "exponent": _exponent_check(p, threshold)}
    echo = {"algebra_dim": algebra_dim, "n": n, "N": N, "k": k, "p": float(p), "t0": t0, "t1": t1,
            "dilation_constant": c, "seed": int(seed),
            "profile": {"kind": profile.kind, "parameters": _plain(profile.parameters)}}
    return Certificate(decide(checks, p, threshold, threshold), "theorem-1.6", checks, threshold,
                       echo, scope="invariant solutions u = v o pi only")
