"""Normed division algebras by Cayley-Dickson doubling, and the Euclidean Hopf maps.

Elements of R, C, H and O are stored as coefficient vectors over the basis
e0, ..., e_{dim-1}.  The doubling rule used throughout is

    (a, b)(c, d) = (ac - conj(d) b, d a + b conj(c)),

starting from the reals.  All array routines act on the last axis, so a batch
of elements is simply an array of shape (..., dim).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

DIMS = (1, 2, 4, 8)
NAMES = {1: "R", 2: "C", 4: "H", 8: "O"}


def _check_dim(n: int) -> None:
    if n not in DIMS:
        raise ValueError(f"algebra dimension must be one of {DIMS}, got {n}")


def cd_conj(a: np.ndarray) -> np.ndarray:
    out = -np.asarray(a, dtype=float)
    out[..., 0] = -out[..., 0]
    return out


def cd_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Cayley-Dickson product of two batches of equal dimension."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n = a.shape[-1]
    if b.shape[-1] != n:
        raise ValueError(f"dimension mismatch: {n} vs {b.shape[-1]}")
    if n == 1:
        return a * b
    h = n // 2
    p, q = a[..., :h], a[..., h:]
    r, s = b[..., :h], b[..., h:]
    first = cd_mul(p, r) - cd_mul(cd_conj(s), q)
    second = cd_mul(s, p) + cd_mul(q, cd_conj(r))
    return np.concatenate([first, second], axis=-1)


def multiplication_table(dim: int) -> list[list[tuple[int, int]]]:
    """Signed basis table: entry [i][j] = (sign, k) with e_i e_j = sign * e_k."""
    _check_dim(dim)
    eye = np.eye(dim)
    table = []
    for i in range(dim):
        row = []
        for j in range(dim):
            prod = cd_mul(eye[i], eye[j])
            k = int(np.argmax(np.abs(prod)))
            row.append((int(np.sign(prod[k])), k))
        table.append(row)
    return table


class AlgebraElement:
    """Immutable element of R, C, H or O."""

    __slots__ = ("_coeffs",)

    def __init__(self, coeffs):
        arr = np.array(coeffs, dtype=float).reshape(-1)
        _check_dim(arr.size)
        arr.setflags(write=False)
        self._coeffs = arr

    @classmethod
    def basis(cls, dim: int, i: int) -> "AlgebraElement":
        _check_dim(dim)
        c = np.zeros(dim)
        c[i] = 1.0
        return cls(c)

    @classmethod
    def zero(cls, dim: int) -> "AlgebraElement":
        return cls(np.zeros(dim))

    @property
    def coeffs(self) -> np.ndarray:
        return self._coeffs

    @property
    def dim(self) -> int:
        return self._coeffs.size

    def norm(self) -> float:
        return float(np.sqrt(np.dot(self._coeffs, self._coeffs)))

    def conjugate(self) -> "AlgebraElement":
        return AlgebraElement(cd_conj(self._coeffs))

    def __mul__(self, other):
        if isinstance(other, AlgebraElement):
            return mul(self, other)
        if np.isscalar(other):
            return AlgebraElement(self._coeffs * other)
        return NotImplemented

    def __rmul__(self, other):
        if np.isscalar(other):
            return AlgebraElement(self._coeffs * other)
        return NotImplemented

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        if self.dim != other.dim:
            raise ValueError("dimension mismatch")
        return AlgebraElement(self._coeffs + other._coeffs)

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        if self.dim != other.dim:
            raise ValueError("dimension mismatch")
        return AlgebraElement(self._coeffs - other._coeffs)

    def __neg__(self) -> "AlgebraElement":
        return AlgebraElement(-self._coeffs)

    def __eq__(self, other) -> bool:
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        return self.dim == other.dim and bool(np.array_equal(self._coeffs, other._coeffs))

    def __hash__(self) -> int:
        return hash(self._coeffs.tobytes())

    def isclose(self, other: "AlgebraElement", atol: float = 1e-12) -> bool:
        return self.dim == other.dim and bool(np.allclose(self._coeffs, other._coeffs, rtol=0, atol=atol))

    def __repr__(self) -> str:
        terms = " + ".join(f"{c:g} e{i}" for i, c in enumerate(self._coeffs))
        return f"AlgebraElement[{NAMES[self.dim]}]({terms})"


def mul(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return AlgebraElement(cd_mul(a.coeffs, b.coeffs))


def conjugate(a: AlgebraElement) -> AlgebraElement:
    return a.conjugate()


# -- Hopf maps ---------------------------------------------------------------


@dataclass(frozen=True)
class HopfPoint:
    """A point (z1, z2) of K x K = R^N, N = 2 dim."""

    z1: AlgebraElement
    z2: AlgebraElement

    def __post_init__(self):
        if self.z1.dim != self.z2.dim:
            raise ValueError("z1 and z2 must live in the same algebra")

    @property
    def dim(self) -> int:
        return self.z1.dim

    def to_array(self) -> np.ndarray:
        return np.concatenate([self.z1.coeffs, self.z2.coeffs])

    @classmethod
    def from_array(cls, x) -> "HopfPoint":
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.size % 2:
            raise ValueError("point of K x K must have even length")
        d = x.size // 2
        return cls(AlgebraElement(x[:d]), AlgebraElement(x[d:]))

    def norm_sq(self) -> float:
        x = self.to_array()
        return float(np.dot(x, x))


def hopf_map_array(x: np.ndarray) -> np.ndarray:
    """pi(z1, z2) = (2 conj(z1) z2, |z1|^2 - |z2|^2) on a batch (..., 2 dim)."""
    x = np.asarray(x, dtype=float)
    d = x.shape[-1] // 2
    _check_dim(d)
    z1, z2 = x[..., :d], x[..., d:]
    top = 2.0 * cd_mul(cd_conj(z1), z2)
    last = np.sum(z1 * z1, axis=-1) - np.sum(z2 * z2, axis=-1)
    return np.concatenate([top, last[..., None]], axis=-1)


def hopf_map(p: HopfPoint) -> np.ndarray:
    return hopf_map_array(p.to_array())


@dataclass(frozen=True)
class DilationModel:
    """lambda^2(x) = constant * |pi(x)| for the Hopf map."""

    constant: float

    def __post_init__(self):
        if not self.constant > 0:
            raise ValueError("dilation constant must be positive")

    @classmethod
    def from_oracle(cls, h: float = 1e-2) -> "DilationModel":
        return cls(oracle_dilation_constant(h))


def dilation_sq(p, model: DilationModel) -> float:
    x = p.to_array() if isinstance(p, HopfPoint) else np.asarray(p, dtype=float)
    return model.constant * float(np.dot(x, x))


def dilation_sq_array(x: np.ndarray, model: DilationModel) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return model.constant * np.sum(x * x, axis=-1)


# -- finite-difference harmonic morphism checks --------------------------------


def fd_laplacian(f: Callable[[np.ndarray], np.ndarray], x, h: float) -> float:
    """Central second-difference Laplacian of a batch-callable f at one point."""
    x = np.asarray(x, dtype=float)
    n = x.size
    pts = np.repeat(x[None, :], 2 * n + 1, axis=0)
    for i in range(n):
        pts[2 * i + 1, i] += h
        pts[2 * i + 2, i] -= h
    vals = np.asarray(f(pts), dtype=float)
    return float((np.sum(vals[1:]) - 2 * n * vals[0]) / (h * h))


def morphism_residual(v: Callable[[np.ndarray], np.ndarray], p, h: float = 1e-3,
                      model: DilationModel | None = None) -> float:
    """|Lap_N (v o pi)(p) - lambda^2(p) (Lap v)(pi(p))| by central differences.

    ``v`` must accept a batch of points of shape (k, dim + 1).
    """
    if h <= 0:
        raise ValueError("step size must be positive")
    model = model or ORACLE_DILATION
    x = p.to_array() if isinstance(p, HopfPoint) else np.asarray(p, dtype=float)
    lifted = fd_laplacian(lambda pts: v(hopf_map_array(pts)), x, h)
    reduced = fd_laplacian(v, hopf_map_array(x), h)
    return abs(lifted - dilation_sq(x, model) * reduced)


def oracle_dilation_constant(h: float = 1e-2) -> float:
    """Ratio Lap(|pi|^2) / (|pi| Lap|w|^2) in the complex case.

    Both sides are evaluated by central differences at a fixed point and
    Richardson-extrapolated; values within 1e-6 of an integer are snapped.
    """
    x = np.array([0.6, -0.3, 0.2, 0.5])
    sq = lambda w: np.sum(w * w, axis=-1)

    def ratio(step):
        lifted = fd_laplacian(lambda pts: sq(hopf_map_array(pts)), x, step)
        reduced = fd_laplacian(sq, hopf_map_array(x), step)
        return lifted / (np.dot(x, x) * reduced)

    c = (4.0 * ratio(h / 2) - ratio(h)) / 3.0
    if abs(c - round(c)) < 1e-6 * abs(c):
        c = float(round(c))
    return float(c)


NOMINAL_DILATION = DilationModel(2.0)
ORACLE_DILATION = DilationModel.from_oracle()
