"""Linear solves used by the variational solver.

Planar problems use a sparse LU factorization; three-dimensional ones use
smoothed-aggregation AMG (pyamg) as a preconditioner for CG on the SPD
operator and for MINRES on indefinite Newton systems.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

DIRECT_LIMIT = 400_000


class SPDSolver:
    def __init__(self, A: sp.spmatrix, dim: int, method: str = "auto"):
        self.A = A.tocsr()
        if method == "auto":
            method = "direct" if dim == 2 and A.shape[0] <= DIRECT_LIMIT else "amg"
        self.method = method
        if method == "direct":
            self._lu = spla.splu(self.A.tocsc())
        elif method == "amg":
            import pyamg

            self._ml = pyamg.smoothed_aggregation_solver(self.A, symmetry="symmetric", max_coarse=500)
            self.M = self._ml.aspreconditioner(cycle="V")
        else:
            raise ValueError(f"unknown linear solver {method!r}")

    def solve(self, b: np.ndarray, rtol: float = 1e-12) -> np.ndarray:
        if self.method == "direct":
            return self._lu.solve(b)
        x, info = spla.cg(self.A, b, rtol=rtol, atol=0.0, M=self.M, maxiter=500)
        return x

    def solve_shifted(self, diag_shift: np.ndarray, b: np.ndarray, rtol: float = 1e-12) -> np.ndarray:
        """Solve (A + diag(diag_shift)) x = b, possibly indefinite."""
        J = (self.A + sp.diags(diag_shift)).tocsc()
        if self.method == "direct":
            return spla.splu(J).solve(b)
        x, info = spla.minres(J, b, rtol=rtol, M=self.M, maxiter=1000)
        return x
