"""Mountain-pass and symmetric sign-changing solutions of the discretized problem.

The discrete functional is

    J(v) = h^d [ 1/2 v.Av - 1/p sum_i Q_i |v_i|^p ],

with A the stencil operator from :func:`assemble`.  Descent directions are
Sobolev gradients A^{-1}(Av - Q|v|^{p-2}v), so the iteration count does not
grow with grid refinement.  Each step moves the peak of the current path
(the ray through the iterate), accepts it by an Armijo test, and re-tensions
the path to the ray through the new point.  Once the relative Sobolev
gradient is small the iterate is polished by Newton's method.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import ndimage

from ..reduction import WeightedEllipticProblem, critical_exponent
from .grid import ConfigurationError, DiscreteOperator, Field, MaskedGrid, assemble
from .linalg import SPDSolver

log = logging.getLogger(__name__)

P_FLOOR = 2 + 1e-3


@dataclass(frozen=True)
class SolverOptions:
    h: float = 1 / 64
    tol_opt: float = 1e-8
    max_iterations: int = 400
    path_segments: int = 64
    armijo: float = 1e-4
    switch_tol: float = 1e-3
    max_newton: int = 25
    polish: bool = True
    seed: int = 0
    cut_cell: bool = True
    linear_solver: str = "auto"
    symmetry: str = "none"


@dataclass
class SolveReport:
    field: Field
    energy: float
    gradient_norm: float
    residual_sup: float
    iterations: int
    converged: bool
    p: float
    mode: str = "positive"
    newton_steps: int = 0
    history: list = field(default_factory=list, repr=False)
    problem: WeightedEllipticProblem | None = field(default=None, repr=False)
    options: SolverOptions | None = field(default=None, repr=False)

    def to_json(self) -> dict:
        return {"p": self.p, "energy": self.energy, "gradientNorm": self.gradient_norm,
                "residualSup": self.residual_sup, "iterations": self.iterations,
                "converged": self.converged}


@dataclass(frozen=True)
class EnergyGradient:
    J: float
    grad: Field


class Session:
    """Discretized problem with its factorized operator; owns its arrays."""

    def __init__(self, problem: WeightedEllipticProblem, options: SolverOptions):
        if problem.p <= P_FLOOR:
            raise ConfigurationError(f"exponent too close to 2 (need p > {P_FLOOR})")
        d = problem.dimension
        if d >= 3 and problem.p >= critical_exponent(d, 0):
            raise ConfigurationError("exponent at or above the compactness threshold of the reduced dimension")
        self.problem = problem
        self.options = options
        self.grid = MaskedGrid(problem.domain, options.h, cut_cell=options.cut_cell)
        self.op: DiscreteOperator = assemble(problem, self.grid)
        self.A = self.op.matrix
        self.Q = self.op.weight_Q
        self.p = problem.p
        self.cv = self.grid.cell_volume
        self.solver = SPDSolver(self.A, self.grid.dim, options.linear_solver)
        self.project = None

    # functional pieces
    def nonlinear(self, v):
        return self.Q * np.abs(v) ** (self.p - 2) * v

    def residual(self, v):
        return self.A @ v - self.nonlinear(v)

    def energy(self, v):
        return self.cv * (0.5 * v @ (self.A @ v) - np.sum(self.Q * np.abs(v) ** self.p) / self.p)

    def ray_peak(self, w):
        """argmax_{t >= 0} J(t w) = (w.Aw / sum Q|w|^p)^{1/(p-2)}."""
        B = w @ (self.A @ w)
        C = np.sum(self.Q * np.abs(w) ** self.p)
        return (B / C) ** (1.0 / (self.p - 2))

    def path_profile(self, w, t_end, segments):
        ts = np.linspace(0.0, t_end, segments + 1)
        return ts, np.array([self.energy(t * w) for t in ts])

    def sobolev(self, r):
        g = self.solver.solve(r)
        return self.project(g) if self.project else g


def _initial_direction(session: Session, mode: str, axis: int, seed: int) -> np.ndarray:
    g = session.grid
    torsion = session.solver.solve(np.ones(g.n))
    rng = np.random.default_rng(seed)
    w = torsion * (1.0 + 0.1 * rng.uniform(size=g.n))
    if mode == "odd":
        w = w * (g.points[:, axis] - g.center[axis])
        w = session.project(w)
    return w / np.max(np.abs(w))


def _initial_path_peak(session: Session, w: np.ndarray, segments: int) -> np.ndarray:
    """Scan the path 0 -> t_e w (J(t_e w) < 0), then refine its peak on the ray."""
    t_end = 1.0
    while session.energy(t_end * w) >= 0:
        t_end *= 2.0
        if t_end > 1e12:
            raise ConfigurationError("functional has no negative values along the initial ray")
    ts, Js = session.path_profile(w, t_end, segments)
    j = int(np.argmax(Js))
    t = session.ray_peak(w)
    if not ts[max(j - 1, 0)] <= t <= ts[min(j + 1, segments)]:
        log.warning("ray peak %.6g outside the sampled bracket around %.6g", t, ts[j])
    return t * w


def _descend(session: Session, w: np.ndarray, opts: SolverOptions, history: list):
    """Sobolev-gradient mountain-pass iteration; returns (w, iterations)."""
    w = _initial_path_peak(session, w, opts.path_segments)
    J = session.energy(w)
    it = 0
    for it in range(1, opts.max_iterations + 1):
        r = session.residual(w)
        if np.max(np.abs(r)) <= opts.tol_opt:
            break
        g = session.sobolev(r)
        slope = session.cv * (r @ g)
        gnorm = math.sqrt(max(session.cv * (g @ (session.A @ g)), 0.0))
        wnorm = math.sqrt(session.cv * (w @ (session.A @ w)))
        history.append({"iteration": it, "energy": J, "sobolev_gradient": gnorm / wnorm})
        if opts.polish and gnorm <= opts.switch_tol * wnorm:
            break
        s = 1.0
        while True:
            trial = w - s * g
            trial = session.ray_peak(trial) * trial
            Jt = session.energy(trial)
            if Jt <= J - opts.armijo * s * slope or s < 1e-10:
                break
            s *= 0.5
        if s < 1e-10:
            log.warning("line search stalled at iteration %d", it)
            break
        w, J = trial, Jt
    return w, it


def _newton(session: Session, w: np.ndarray, opts: SolverOptions):
    p = session.p
    r = session.residual(w)
    nr = np.max(np.abs(r))
    steps = 0
    for steps in range(1, opts.max_newton + 1):
        if nr <= opts.tol_opt:
            return w, steps - 1, True
        shift = -(p - 1) * session.Q * np.abs(w) ** (p - 2)
        rtol = min(1e-6, 1e-2 * opts.tol_opt / nr)
        dw = session.solver.solve_shifted(shift, -r, rtol=rtol)
        if session.project:
            dw = session.project(dw)
        lam = 1.0
        while lam > 1e-4:
            trial = w + lam * dw
            rt = session.residual(trial)
            nt = np.max(np.abs(rt))
            if nt < nr:
                break
            lam *= 0.5
        else:
            return w, steps, False
        w, r, nr = trial, rt, nt
    return w, steps, nr <= opts.tol_opt


def _run(problem: WeightedEllipticProblem, options: SolverOptions, mode: str, axis: int = 0,
         initial: np.ndarray | None = None, session: Session | None = None) -> SolveReport:
    session = session or Session(problem, options)
    if mode == "odd":
        if options.symmetry != "none":
            raise ConfigurationError("odd solves do not combine with a symmetry group")
        perm = session.grid.reflection_permutation(axis)
        _check_reflection(session, perm, axis)
        session.project = lambda v: 0.5 * (v - v[perm])
    elif options.symmetry == "cube":
        images = _check_cube_symmetry(session)
        session.project = lambda v: sum(v[im] for im in images) / len(images)
    elif options.symmetry != "none":
        raise ConfigurationError(f"unknown symmetry {options.symmetry!r}")
    w = initial if initial is not None else _initial_direction(session, mode, axis, options.seed)
    if session.project:
        w = session.project(w)
    history: list = []
    total_newton = 0
    iterations = 0
    w_start = w
    for attempt in range(3):
        w, its = _descend(session, w_start, options, history)
        iterations += its
        J_mp = session.energy(w)
        if not options.polish:
            break
        w_new, steps, ok = _newton(session, w, options)
        total_newton += steps
        J_new = session.energy(w_new)
        same_level = abs(J_new - J_mp) <= 1e-2 * abs(J_mp)
        sign_ok = mode != "positive" or np.min(w_new) >= -1e-8 * np.max(np.abs(w_new))
        if ok and same_level and sign_ok:
            w = w_new
            break
        # Newton left the mountain-pass branch: resume the descent with a tighter switch
        options = replace(options, switch_tol=options.switch_tol * 1e-2)
        w_start = w
    if session.project:
        w = session.project(w)
    r = session.residual(w)
    gnorm = float(np.max(np.abs(session.cv * r)))
    report = SolveReport(
        field=Field(session.grid, w),
        energy=float(session.energy(w)),
        gradient_norm=gnorm,
        residual_sup=float(np.max(np.abs(r))),
        iterations=iterations,
        converged=bool(gnorm <= options.tol_opt * session.cv),
        p=float(problem.p),
        mode="positive" if mode == "positive" else "sign_changing",
        newton_steps=total_newton,
        history=history,
        problem=problem,
        options=options,
    )
    report.session = session
    return report


def _check_reflection(session: Session, perm: np.ndarray, axis: int) -> None:
    g = session.grid
    mirrored = g.points.copy()
    mirrored[:, axis] = 2 * g.center[axis] - mirrored[:, axis]
    pr = session.problem
    for name, fn in (("weight", pr.weight), ("coefficient", pr.coefficient), ("linear", pr.linear)):
        if fn is None:
            continue
        a, b = np.asarray(fn(g.points)), np.asarray(fn(mirrored))
        if not np.allclose(a, b, rtol=1e-12, atol=0):
            raise ConfigurationError(f"{name} is not invariant under the reflection of axis {axis}")
    # theta arrays must pair up under the reflection as well
    for ax in range(g.dim):
        tl, tr = g.theta[ax]
        other_l, other_r = (tr, tl) if ax == axis else (tl, tr)
        if not (np.allclose(tl, other_l[perm], rtol=0, atol=1e-12) and
                np.allclose(tr, other_r[perm], rtol=0, atol=1e-12)):
            raise ConfigurationError("grid boundary fractions are not reflection symmetric")


def _check_cube_symmetry(session: Session) -> list:
    """Invariance of coefficients and boundary fractions under the cube group."""
    g = session.grid
    pr = session.problem
    elements = g.symmetry_permutations()
    x = g.points - g.center
    for perm, flips, image in elements:
        mapped = np.empty_like(x)
        for a in range(g.dim):
            mapped[:, perm[a]] = flips[a] * x[:, a]
        mapped += g.center
        for name, fn in (("weight", pr.weight), ("coefficient", pr.coefficient), ("linear", pr.linear)):
            if fn is None:
                continue
            if not np.allclose(np.asarray(fn(g.points)), np.asarray(fn(mapped)), rtol=1e-12, atol=0):
                raise ConfigurationError(f"{name} is not invariant under the cube symmetries")
        for a in range(g.dim):
            for side in (0, 1):
                side_img = side if flips[a] == 1 else 1 - side
                if not np.allclose(g.theta[a][side], g.theta[perm[a]][side_img][image], rtol=0, atol=1e-12):
                    raise ConfigurationError("grid boundary fractions are not invariant under the cube symmetries")
    return [image for _, _, image in elements]


def energy_and_gradient(field: Field, problem: WeightedEllipticProblem,
                        op: DiscreteOperator | None = None) -> EnergyGradient:
    """J by nodal quadrature and its gradient (Av - Q|v|^{p-2}v) h^d."""
    op = op or assemble(problem, field.grid)
    v = field.values
    cv = field.grid.cell_volume
    Av = op.matrix @ v
    Qv = op.weight_Q * np.abs(v) ** (problem.p - 2) * v
    J = cv * (0.5 * v @ Av - np.sum(op.weight_Q * np.abs(v) ** problem.p) / problem.p)
    return EnergyGradient(float(J), Field(field.grid, cv * (Av - Qv)))


def mountain_pass_solve(problem: WeightedEllipticProblem, options: SolverOptions | None = None,
                        initial: Field | None = None) -> SolveReport:
    """Least-energy positive solution via the mountain-pass iteration."""
    options = options or SolverOptions()
    init = None if initial is None else np.abs(initial.values)
    return _run(problem, options, "positive", initial=init)


def sign_changing_solve(problem: WeightedEllipticProblem, options: SolverOptions | None = None,
                        axis: int = 0) -> SolveReport:
    """Mountain pass restricted to functions odd under x_axis -> 2c - x_axis.

    The grid, weight and coefficients must be invariant under that reflection.
    """
    options = options or SolverOptions()
    return _run(problem, options, "odd", axis=axis)


def continuation_in_p(problem: WeightedEllipticProblem, p_list, options: SolverOptions | None = None):
    """Warm-started solves along an increasing list of exponents."""
    ps = [float(p) for p in p_list]
    if any(b <= a for a, b in zip(ps, ps[1:])):
        raise ValueError("exponents must be strictly increasing")
    options = options or SolverOptions()
    reports = []
    prev = None
    for p in ps:
        pr = problem.with_exponent(p)
        init = None if prev is None else prev.field.values / np.max(prev.field.values)
        rep = _run(pr, options, "positive", initial=init)
        reports.append(rep)
        prev = rep
    return reports


def ray_maximum(report: SolveReport, t_max: float = 3.0, samples: int = 601) -> float:
    """max_t J(t v) over a sampled ray through the solution."""
    session = report.session
    ts = np.linspace(0.0, t_max, samples)
    v = report.field.values
    return float(max(session.energy(t * v) for t in ts))


def nodal_domains(field: Field, rel_threshold: float = 1e-9) -> int:
    """Number of connected components of {v > 0} and {v < 0} (face connectivity)."""
    arr = field.to_array()
    thr = rel_threshold * np.max(np.abs(arr))
    n_pos = ndimage.label(arr > thr)[1]
    n_neg = ndimage.label(arr < -thr)[1]
    return int(n_pos + n_neg)
