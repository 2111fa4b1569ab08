"""Masked uniform grids, grid fields and the weighted stencil operator."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp
from scipy import ndimage

from ..geometry import ProfileDomain

MIN_NODES_ACROSS = 8
THETA_FLOOR = 1e-3


class ConfigurationError(ValueError):
    """The discretization or problem setup violates a precondition."""


class MaskedGrid:
    """Uniform grid over a profile's bounding box with an inside mask.

    Node coordinates are ``center + (j - m) h`` with an odd node count per
    axis, so grids over domains symmetric about ``center`` are exactly
    symmetric.  For every inside node and each of the 2d directions,
    ``theta[axis][side]`` holds the fraction of a grid step to the boundary
    (1 when the neighbour is itself inside).
    """

    def __init__(self, profile: ProfileDomain, h: float, cut_cell: bool = True):
        if not h > 0:
            raise ConfigurationError("grid spacing must be positive")
        self.profile = profile
        self.h = float(h)
        self.dim = profile.dimension
        if self.dim not in (2, 3):
            raise ConfigurationError("direct solves are supported in 2 and 3 dimensions only")
        lo, hi = (np.asarray(b, dtype=float) for b in profile.bbox)
        self.center = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        self.m = np.array([int(math.ceil(x / h)) + 1 for x in half])
        self.shape = tuple(int(2 * m + 1) for m in self.m)
        self.cut_cell = cut_cell

        axes = [self.center[i] + (np.arange(n) - self.m[i]) * self.h for i, n in enumerate(self.shape)]
        self.axes = axes
        mesh = np.meshgrid(*axes, indexing="ij")
        nodes = np.stack([g.ravel() for g in mesh], axis=1)
        mask = profile.contains(nodes).reshape(self.shape)
        for ax in range(self.dim):
            sl = [slice(None)] * self.dim
            sl[ax] = 0
            mask[tuple(sl)] = False
            sl[ax] = -1
            mask[tuple(sl)] = False
        self.mask = mask
        self.flat_inside = np.flatnonzero(mask.ravel())
        self.n = len(self.flat_inside)
        if self.n == 0:
            raise ConfigurationError("no grid nodes inside the domain")
        index = np.full(mask.size, -1, dtype=np.int64)
        index[self.flat_inside] = np.arange(self.n)
        self.index = index
        self.points = nodes[self.flat_inside]
        self.strides = [int(np.prod(self.shape[ax + 1:])) for ax in range(self.dim)]
        self._build_neighbours()

    @property
    def cell_volume(self) -> float:
        return self.h ** self.dim

    def _build_neighbours(self):
        # neighbour[ax][s] = index of the neighbour (-1 if outside); theta likewise
        self.neighbour = []
        self.theta = []
        for ax in range(self.dim):
            nb_ax, th_ax = [], []
            for sgn in (-1, 1):
                nb = self.index[self.flat_inside + sgn * self.strides[ax]]
                th = np.ones(self.n)
                out = nb < 0
                if self.cut_cell and np.any(out):
                    th[out] = self._boundary_fraction(self.points[out], ax, sgn)
                nb_ax.append(nb)
                th_ax.append(th)
            self.neighbour.append(nb_ax)
            self.theta.append(th_ax)

    def _boundary_fraction(self, pts, ax, sgn, iters=48):
        lo = np.zeros(len(pts))
        hi = np.ones(len(pts))
        for _ in range(iters):
            mid = 0.5 * (lo + hi)
            probe = pts.copy()
            probe[:, ax] += sgn * mid * self.h
            ins = self.profile.contains(probe)
            lo = np.where(ins, mid, lo)
            hi = np.where(ins, hi, mid)
        return np.maximum(0.5 * (lo + hi), THETA_FLOOR)

    def check_resolution(self, min_nodes: int = MIN_NODES_ACROSS) -> None:
        for ax in range(self.dim):
            m = np.moveaxis(self.mask, ax, -1).reshape(-1, self.shape[ax]).astype(np.int8)
            # longest run of consecutive inside nodes along this axis
            best = 0
            run = np.zeros(m.shape[0], dtype=np.int64)
            for j in range(m.shape[1]):
                run = (run + 1) * m[:, j]
                best = max(best, int(run.max()))
            if best < min_nodes:
                raise ConfigurationError(
                    f"domain under-resolved along axis {ax}: {best} nodes across (< {min_nodes})")

    def full(self, values: np.ndarray) -> np.ndarray:
        out = np.zeros(int(np.prod(self.shape)))
        out[self.flat_inside] = values
        return out.reshape(self.shape)

    def reflection_permutation(self, axis: int) -> np.ndarray:
        """Permutation of inside nodes induced by x_axis -> 2 c_axis - x_axis."""
        multi = np.array(np.unravel_index(self.flat_inside, self.shape))
        multi[axis] = self.shape[axis] - 1 - multi[axis]
        image = self.index[np.ravel_multi_index(tuple(multi), self.shape)]
        if np.any(image < 0):
            raise ConfigurationError("grid mask is not symmetric under the reflection")
        return image

    def symmetry_permutations(self) -> list:
        """(perm, flips, node permutation) for every coordinate permutation and
        reflection about the grid center, i.e. the symmetry group of the cube."""
        if len(set(self.shape)) != 1:
            raise ConfigurationError("cube symmetries need equal node counts on every axis")
        multi = np.array(np.unravel_index(self.flat_inside, self.shape))
        last = self.shape[0] - 1
        out = []
        for perm in itertools.permutations(range(self.dim)):
            for flips in itertools.product((1, -1), repeat=self.dim):
                image_multi = np.empty_like(multi)
                for a in range(self.dim):
                    image_multi[perm[a]] = multi[a] if flips[a] == 1 else last - multi[a]
                image = self.index[np.ravel_multi_index(tuple(image_multi), self.shape)]
                if np.any(image < 0):
                    raise ConfigurationError("grid mask is not invariant under the cube symmetries")
                out.append((perm, flips, image))
        return out

    def gradient(self, values: np.ndarray) -> np.ndarray:
        """Nodal gradient by three-point differences on the (possibly cut) stencil.

        Boundary neighbours sit at distance theta h and carry the Dirichlet zero.
        """
        g = np.empty((self.n, self.dim))
        for ax in range(self.dim):
            (nl, nr), (tl, tr) = self.neighbour[ax], self.theta[ax]
            ul = np.where(nl >= 0, values[np.maximum(nl, 0)], 0.0)
            ur = np.where(nr >= 0, values[np.maximum(nr, 0)], 0.0)
            hl, hr = tl * self.h, tr * self.h
            g[:, ax] = (hl * hl * (ur - values) + hr * hr * (values - ul)) / (hl * hr * (hl + hr))
        return g


@dataclass
class Field:
    """Nodal values on the inside nodes of a grid (zero elsewhere)."""

    grid: MaskedGrid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n,):
            raise ValueError("field size does not match the grid")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field values must be finite")
        self._coeffs = {}

    def copy(self) -> "Field":
        return Field(self.grid, self.values.copy())

    def to_array(self) -> np.ndarray:
        return self.grid.full(self.values)

    def _spline(self, order):
        if order not in self._coeffs:
            self._coeffs[order] = ndimage.spline_filter(self.to_array(), order=order, mode="grid-constant")
        return self._coeffs[order]

    def evaluate(self, points, order: int = 1, check_domain: bool = True) -> np.ndarray:
        """Interpolate at arbitrary points: order 1 is (bi/tri)linear; 3 and 5 are
        cardinal B-splines (C^2 and C^4), with zero data outside the mask.
        """
        x = np.atleast_2d(np.asarray(points, dtype=float))
        g = self.grid
        if check_domain:
            ins = g.profile.contains(x)
            if not np.all(ins):
                near = _near_boundary(g.profile, x[~ins], 2 * g.h)
                if not np.all(near):
                    raise ValueError("query point outside the closure of the domain")
        coords = ((x - g.center) / g.h + g.m).T
        if order == 1:
            return ndimage.map_coordinates(self.to_array(), coords, order=1, mode="constant", cval=0.0)
        if order not in (3, 5):
            raise ValueError("interpolation order must be 1, 3 or 5")
        return ndimage.map_coordinates(self._spline(order), coords, order=order, mode="grid-constant",
                                       prefilter=False)


def _near_boundary(profile: ProfileDomain, x: np.ndarray, dist: float) -> np.ndarray:
    out = np.empty(len(x), dtype=bool)
    for i, p in enumerate(x):
        out[i] = np.min(np.linalg.norm(profile.points - p, axis=1)) <= dist
    return out


@dataclass(frozen=True)
class DiscreteOperator:
    """Sparse matrix of -div(a grad .) + c0 on the inside nodes, in residual
    units (entries scale like 1/h^2).  ``weight_Q`` and ``linear`` hold the
    nodal coefficient values."""

    matrix: sp.csr_matrix
    grid: MaskedGrid
    weight_Q: np.ndarray
    linear: np.ndarray

    def apply(self, v: np.ndarray) -> np.ndarray:
        return self.matrix @ v


def assemble(problem, grid: MaskedGrid) -> DiscreteOperator:
    """(2d+1)-point stencil with arithmetic face averages of the weight a.

    A boundary face at fraction theta of a step contributes a(face)/(theta h^2)
    to the diagonal, the symmetric form of a linear ghost value through the
    boundary zero.
    """
    grid.check_resolution()
    pts = grid.points
    a = np.asarray(problem.weight(pts), dtype=float)
    if np.any(a <= 0):
        raise ConfigurationError("weight a must be strictly positive on the domain")
    h2 = grid.h * grid.h
    rows, cols, vals = [], [], []
    diag = np.zeros(grid.n)
    for ax in range(grid.dim):
        for s, sgn in enumerate((-1, 1)):
            nb = grid.neighbour[ax][s]
            th = grid.theta[ax][s]
            inner = nb >= 0
            if sgn == 1:
                i, j = np.flatnonzero(inner), nb[inner]
                w = 0.5 * (a[i] + a[j]) / h2
                rows += [i, j]
                cols += [j, i]
                vals += [-w, -w]
            idx = np.flatnonzero(inner)
            diag[idx] += 0.5 * (a[idx] + a[nb[idx]]) / h2
            out = np.flatnonzero(~inner)
            if len(out):
                bpts = pts[out].copy()
                bpts[:, ax] += sgn * th[out] * grid.h
                ab = np.asarray(problem.weight(bpts), dtype=float)
                diag[out] += 0.5 * (a[out] + ab) / (th[out] * h2)
    c0 = np.zeros(grid.n) if problem.linear is None else np.asarray(problem.linear(pts), dtype=float)
    diag += c0
    rows.append(np.arange(grid.n))
    cols.append(np.arange(grid.n))
    vals.append(diag)
    A = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(grid.n, grid.n))
    A.sum_duplicates()
    Q = np.asarray(problem.coefficient(pts), dtype=float)
    if np.any(Q <= 0):
        raise ConfigurationError("coefficient Q must be strictly positive on the domain")
    return DiscreteOperator(A, grid, Q, c0)
