"""Direct solver wrappers: residual reporting and failure modes."""

import numpy as np
import pytest
import scipy.sparse as sps

from galbrunhdg.solver import (
    DenseFactor,
    IndefiniteMatrixError,
    SingularMatrixError,
    hermitian_solve,
    sparse_solve,
    sym2_eigs,
    sym2_eigs_batch,
)


def test_dense_factor_solves(rng):
    A = rng.standard_normal((12, 12)) + 1j * rng.standard_normal((12, 12))
    b = rng.standard_normal(12)
    x = DenseFactor(A).solve(b)
    assert np.linalg.norm(A @ x - b) < 1e-10 * np.linalg.norm(b)


def test_dense_factor_multiple_rhs(rng):
    A = rng.standard_normal((6, 6)) + np.eye(6) * 4
    B = rng.standard_normal((6, 3))
    X = DenseFactor(A).solve(B)
    assert np.max(np.abs(A @ X - B)) < 1e-12


def test_dense_singular_raises():
    with pytest.raises(SingularMatrixError):
        DenseFactor(np.zeros((4, 4)))


def test_sparse_solve_residual(rng):
    n = 60
    A = sps.diags([2.0 + 0.5j] * n) + sps.random(
        n, n, density=0.08, random_state=1
    )
    b = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    x, info = sparse_solve(A.tocsr(), b)
    assert info.residual < 1e-12
    assert "splu" in info.method


def test_sparse_singular_raises():
    A = sps.csr_matrix((5, 5))
    with pytest.raises((SingularMatrixError, RuntimeError)):
        sparse_solve(A, np.ones(5))


def test_hermitian_solve_dense(rng):
    M = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
    H = M @ M.conj().T + 8 * np.eye(8)
    b = rng.standard_normal(8)
    x, info = hermitian_solve(H, b)
    assert np.linalg.norm(H @ x - b) < 1e-10


def test_hermitian_solve_rejects_nonhermitian(rng):
    A = rng.standard_normal((5, 5))
    A[0, 1] += 1.0
    with pytest.raises(IndefiniteMatrixError):
        hermitian_solve(A + 1j * np.triu(np.ones((5, 5)), 1), np.ones(5))


def test_sym2_eigs_closed_form():
    lo, hi = sym2_eigs(np.array([[2.0, 1.0], [1.0, 2.0]]))
    assert lo == pytest.approx(1.0)
    assert hi == pytest.approx(3.0)


def test_sym2_eigs_batch_matches_numpy(rng):
    ms = rng.standard_normal((50, 2, 2))
    ms = ms + ms.transpose(0, 2, 1)
    lo, hi = sym2_eigs_batch(ms)
    ref = np.linalg.eigvalsh(ms)
    assert np.allclose(lo, ref[:, 0])
    assert np.allclose(hi, ref[:, 1])
