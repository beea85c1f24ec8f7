"""Reference-element quadrature rules and orthonormal modal bases.

Reference triangle: T = {(x, y) : x >= 0, y >= 0, x + y <= 1} (area 1/2).
Reference segment: [0, 1].

Triangle quadrature is a collapsed Gauss-Legendre x Gauss-Jacobi(1,0)
product rule, exact for any requested total degree. The triangle basis is
an orthonormal Dubiner-type modal basis evaluated through singularity-free
recurrences, so it stays well conditioned up to high degree.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import eval_jacobi, roots_jacobi

MAX_QUAD_DEGREE = 60


@dataclass(frozen=True)
class QuadRule:
    """Quadrature points (reference coordinates) and positive weights."""

    points: np.ndarray  # (nq, dim) for triangle, (nq,) for segment
    weights: np.ndarray  # (nq,)
    exactness: int

    @property
    def npoints(self) -> int:
        return len(self.weights)


def _check_degree(exactness: int) -> None:
    if exactness < 0:
        raise ValueError(f"quadrature exactness must be >= 0, got {exactness}")
    if exactness > MAX_QUAD_DEGREE:
        raise ValueError(
            f"quadrature exactness {exactness} exceeds the implemented "
            f"maximum {MAX_QUAD_DEGREE}"
        )


@lru_cache(maxsize=None)
def quad_segment(exactness: int) -> QuadRule:
    """Gauss-Legendre rule on [0, 1], exact for polynomials of degree
    <= exactness."""
    _check_degree(exactness)
    n = exactness // 2 + 1
    x, w = np.polynomial.legendre.leggauss(n)
    return QuadRule(points=(x + 1.0) / 2.0, weights=w / 2.0, exactness=exactness)


@lru_cache(maxsize=None)
def quad_triangle(exactness: int) -> QuadRule:
    """Product rule on the reference triangle, exact for bivariate
    polynomials of total degree <= exactness.

    Built by collapsing the unit square onto the triangle with a
    Gauss-Jacobi(1,0) rule absorbing the Jacobian, so all weights are
    positive and sum to 1/2.
    """
    _check_degree(exactness)
    n = exactness // 2 + 1
    xa, wa = np.polynomial.legendre.leggauss(n)  # on [-1, 1]
    xb, wb = roots_jacobi(n, 1, 0)  # weight (1 - x) on [-1, 1]
    # Collapsed coordinates: x = (1+a)(1-b)/4, y = (1+b)/2.
    a, b = np.meshgrid(xa, xb, indexing="ij")
    x = (1.0 + a) * (1.0 - b) / 4.0
    y = (1.0 + b) / 2.0
    w = np.outer(wa, wb) / 8.0
    pts = np.column_stack([x.ravel(), y.ravel()])
    return QuadRule(points=pts, weights=w.ravel(), exactness=exactness)


def triangle_dim(k: int) -> int:
    """Dimension of P^k on a triangle."""
    return (k + 1) * (k + 2) // 2


def _scaled_legendre(eta, zeta, eta_dx, eta_dy, zeta_dx, zeta_dy, n):
    """Evaluate psi_i = zeta^i P_i(eta/zeta) for i = 0..n together with the
    (x, y)-derivatives, via the homogenized Legendre recurrence. Polynomial
    in (eta, zeta), hence safe on the whole triangle."""
    shape = np.shape(eta)
    psi = np.zeros((n + 1,) + shape)
    psi_x = np.zeros_like(psi)
    psi_y = np.zeros_like(psi)
    psi[0] = 1.0
    if n >= 1:
        psi[1] = eta
        psi_x[1] = eta_dx
        psi_y[1] = eta_dy
    for i in range(1, n):
        c1 = (2 * i + 1) / (i + 1)
        c2 = i / (i + 1)
        z2 = zeta * zeta
        psi[i + 1] = c1 * eta * psi[i] - c2 * z2 * psi[i - 1]
        psi_x[i + 1] = c1 * (eta_dx * psi[i] + eta * psi_x[i]) - c2 * (
            2.0 * zeta * zeta_dx * psi[i - 1] + z2 * psi_x[i - 1]
        )
        psi_y[i + 1] = c1 * (eta_dy * psi[i] + eta * psi_y[i]) - c2 * (
            2.0 * zeta * zeta_dy * psi[i - 1] + z2 * psi_y[i - 1]
        )
    return psi, psi_x, psi_y


def _jacobi_deriv(j, alpha, b):
    if j == 0:
        return np.zeros_like(b)
    return 0.5 * (j + alpha + 1) * eval_jacobi(j - 1, alpha + 1, 1, b)


class TriangleBasis:
    """Orthonormal modal basis of P^k on the reference triangle.

    Basis index order: (i, j) with i + j <= k, lexicographic in (i, j).
    """

    def __init__(self, k: int):
        if k < 0:
            raise ValueError("degree must be >= 0")
        self.k = k
        self.dim = triangle_dim(k)
        self.index_pairs = [(i, j) for i in range(k + 1) for j in range(k + 1 - i)]
        self._norms = self._compute_norms()

    def _eval_raw(self, pts):
        """Unnormalized basis values and gradients at pts (n, 2)."""
        pts = np.asarray(pts, dtype=float)
        x = pts[:, 0]
        y = pts[:, 1]
        eta = 2.0 * x + y - 1.0
        zeta = 1.0 - y
        ones = np.ones_like(x)
        zeros = np.zeros_like(x)
        psi, psi_x, psi_y = _scaled_legendre(
            eta, zeta, 2.0 * ones, ones, zeros, -ones, self.k
        )
        b = 2.0 * y - 1.0
        vals = np.empty((self.dim, len(x)))
        gx = np.empty_like(vals)
        gy = np.empty_like(vals)
        for m, (i, j) in enumerate(self.index_pairs):
            alpha = 2 * i + 1
            q = eval_jacobi(j, alpha, 0, b)
            dq = 2.0 * _jacobi_deriv(j, alpha, b)  # d/dy = 2 d/db
            vals[m] = psi[i] * q
            gx[m] = psi_x[i] * q
            gy[m] = psi_y[i] * q + psi[i] * dq
        return vals, gx, gy

    def _compute_norms(self):
        rule = quad_triangle(2 * self.k + 2)
        vals, _, _ = self._eval_raw(rule.points)
        nrm2 = (vals * vals) @ rule.weights
        return 1.0 / np.sqrt(nrm2)

    def eval(self, pts) -> np.ndarray:
        """Basis values, shape (dim, npts)."""
        vals, _, _ = self._eval_raw(np.atleast_2d(pts))
        return vals * self._norms[:, None]

    def eval_grad(self, pts) -> tuple[np.ndarray, np.ndarray]:
        """Reference-coordinate gradients (d/dx, d/dy), each (dim, npts)."""
        _, gx, gy = self._eval_raw(np.atleast_2d(pts))
        return gx * self._norms[:, None], gy * self._norms[:, None]

    def eval_all(self, pts):
        """Values and gradients in one pass."""
        vals, gx, gy = self._eval_raw(np.atleast_2d(pts))
        s = self._norms[:, None]
        return vals * s, gx * s, gy * s


class SegmentBasis:
    """Orthonormal shifted-Legendre basis of P^k on [0, 1]."""

    def __init__(self, k: int):
        if k < 0:
            raise ValueError("degree must be >= 0")
        self.k = k
        self.dim = k + 1

    def eval(self, t) -> np.ndarray:
        """Basis values, shape (dim, npts)."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        s = 2.0 * t - 1.0
        vals = np.empty((self.dim, len(t)))
        for m in range(self.dim):
            vals[m] = np.sqrt(2 * m + 1) * eval_jacobi(m, 0, 0, s)
        return vals


@lru_cache(maxsize=None)
def triangle_basis(k: int) -> TriangleBasis:
    return TriangleBasis(k)


@lru_cache(maxsize=None)
def segment_basis(k: int) -> SegmentBasis:
    return SegmentBasis(k)


def eval_basis(k: int, pts) -> np.ndarray:
    """Triangle modal basis values, rows = basis functions, cols = points."""
    return triangle_basis(k).eval(pts)


def eval_basis_grad(k: int, pts) -> np.ndarray:
    """Triangle modal basis gradients, shape (dim, npts, 2)."""
    gx, gy = triangle_basis(k).eval_grad(pts)
    return np.stack([gx, gy], axis=-1)
