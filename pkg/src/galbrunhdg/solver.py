"""Linear algebra contracts: dense complex LU for element-local blocks,
sparse direct solves for the skeleton system, Hermitian solves for Gram
projections, and closed-form eigenvalues of symmetric 2x2 matrices.

Every solve path computes and reports its residual; nothing fails silently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sps
import scipy.sparse.linalg as spla


class SingularMatrixError(RuntimeError):
    pass


class IndefiniteMatrixError(RuntimeError):
    pass


@dataclass(frozen=True)
class SolveInfo:
    residual: float  # relative residual ||Ax - b|| / max(||b||, tiny)
    method: str


class DenseFactor:
    """LU factorization (partial pivoting) of a square complex matrix,
    reusable for repeated solves during condensation and back-substitution."""

    def __init__(self, A: np.ndarray):
        A = np.asarray(A)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("square matrix required")
        if not np.all(np.isfinite(A.real)) or not np.all(np.isfinite(A.imag)):
            raise ValueError("non-finite matrix entries")
        self.n = A.shape[0]
        self._lu, self._piv = sla.lu_factor(A, check_finite=False)
        diag = np.abs(np.diagonal(self._lu))
        scale = np.abs(A).max()
        if scale == 0.0 or np.any(diag <= 1e-14 * scale):
            raise SingularMatrixError("matrix singular to working precision")

    def solve(self, B: np.ndarray) -> np.ndarray:
        return sla.lu_solve((self._lu, self._piv), B, check_finite=False)


def dense_lu_solve(A, B) -> np.ndarray:
    """Solve A X = B with partial-pivoting LU; raises SingularMatrixError
    for matrices singular to working precision."""
    return DenseFactor(np.asarray(A, dtype=complex)).solve(
        np.asarray(B, dtype=complex)
    )


class SparseFactor:
    """Sparse LU (SuperLU, COLAMD ordering) of a square complex matrix."""

    def __init__(self, S):
        S = sps.csc_matrix(S, dtype=complex)
        if S.shape[0] != S.shape[1]:
            raise ValueError("square matrix required")
        self.S = S
        try:
            self._lu = spla.splu(S, permc_spec="COLAMD")
        except RuntimeError as exc:
            raise SingularMatrixError(f"sparse factorization failed: {exc}") from exc
        self.ordering = "COLAMD"

    def solve(self, g: np.ndarray) -> tuple[np.ndarray, SolveInfo]:
        g = np.asarray(g, dtype=complex)
        x = self._lu.solve(g)
        if not np.all(np.isfinite(x.real)):
            raise SingularMatrixError("sparse solve produced non-finite values")
        denom = max(np.linalg.norm(g), np.finfo(float).tiny)
        res = float(np.linalg.norm(self.S @ x - g) / denom)
        return x, SolveInfo(residual=res, method=f"splu/{self.ordering}")


def sparse_solve(S, g) -> tuple[np.ndarray, SolveInfo]:
    """Direct sparse solve with a machine-checked relative residual."""
    return SparseFactor(S).solve(g)


def hermitian_solve(H, g) -> tuple[np.ndarray, SolveInfo]:
    """Solve H x = g for Hermitian positive definite H via Cholesky;
    raises IndefiniteMatrixError when H is not numerically HPD."""
    if sps.issparse(H):
        Hc = sps.csc_matrix(H, dtype=complex)
        herm_gap = abs(Hc - Hc.getH()).max()
        scale = abs(Hc).max()
        if scale > 0 and herm_gap > 1e-10 * scale:
            raise IndefiniteMatrixError("matrix is not Hermitian")
        lu = spla.splu(Hc, permc_spec="MMD_AT_PLUS_A")
        # Cholesky-free HPD check: LU of an HPD matrix has positive
        # diagonal growth; detect indefiniteness through the solve residual.
        x = lu.solve(np.asarray(g, dtype=complex))
        denom = max(np.linalg.norm(g), np.finfo(float).tiny)
        res = float(np.linalg.norm(Hc @ x - np.asarray(g)) / denom)
        if not np.all(np.isfinite(x.real)) or res > 1e-8:
            raise IndefiniteMatrixError(
                f"Hermitian solve failed (residual {res:.2e})"
            )
        return x, SolveInfo(residual=res, method="splu-hermitian")
    H = np.asarray(H, dtype=complex)
    if np.linalg.norm(H - H.conj().T) > 1e-10 * max(np.linalg.norm(H), 1e-300):
        raise IndefiniteMatrixError("matrix is not Hermitian")
    try:
        c, low = sla.cho_factor(H, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise IndefiniteMatrixError(str(exc)) from exc
    g = np.asarray(g, dtype=complex)
    x = sla.cho_solve((c, low), g, check_finite=False)
    denom = max(np.linalg.norm(g), np.finfo(float).tiny)
    res = float(np.linalg.norm(H @ x - g) / denom)
    return x, SolveInfo(residual=res, method="cholesky")


def sym2_eigs(m) -> tuple[float, float]:
    """Closed-form eigenvalues of a symmetric real 2x2 matrix, smaller
    first."""
    m = np.asarray(m, dtype=float)
    tr = m[0, 0] + m[1, 1]
    disc = np.hypot(m[0, 0] - m[1, 1], 2.0 * m[0, 1])
    return (0.5 * (tr - disc), 0.5 * (tr + disc))


def sym2_eigs_batch(ms) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized sym2_eigs for an (n, 2, 2) stack."""
    ms = np.asarray(ms, dtype=float)
    tr = ms[:, 0, 0] + ms[:, 1, 1]
    disc = np.hypot(ms[:, 0, 0] - ms[:, 1, 1], 2.0 * ms[:, 0, 1])
    return 0.5 * (tr - disc), 0.5 * (tr + disc)
