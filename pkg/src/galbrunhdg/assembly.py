"""Global system construction with static condensation.

Per element, the local matrix is split into volume and facet blocks; the
volume block is factorized and eliminated, leaving a Schur complement on
the skeleton (facet) unknowns. Boundary constraints (normal facet modes
dropped) are applied at the local-block level, so the condensed system is
already reduced. An uncondensed full-system path exists as an oracle.

Assembly is deterministic: elements are processed in index order and the
sparse accumulation order is fixed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sps

from .coeffs import CoefficientSet
from .fespace import DiscreteFunction, HdgSpace
from .forms import ElementKernels, FormOptions
from .solver import (
    DenseFactor,
    SingularMatrixError,
    SolveInfo,
    sparse_solve,
)


@dataclass
class LocalElimination:
    """Stored per-element data for back-substitution: the volume factor,
    the (constrained) volume-facet coupling and the volume load."""

    factor: DenseFactor
    a_tf: np.ndarray
    b_t: np.ndarray
    cdofs: np.ndarray  # global coupled dof indices of this element


@dataclass
class CondensedSystem:
    space: HdgSpace
    S: sps.csr_matrix
    g: np.ndarray
    local: list
    n_cdofs: int

    @property
    def nze(self) -> int:
        return int(self.S.nnz)


@dataclass
class FullSystem:
    space: HdgSpace
    S: sps.csr_matrix
    g: np.ndarray
    n_dofs: int


def _local_transform(space: HdgSpace, e: int) -> tuple[np.ndarray, np.ndarray]:
    """Block transform from constrained local dofs (volume + free facet
    modes) to the Cartesian local dof vector, and the global coupled dof
    indices of the element's facets."""
    nvol = space.vol_block
    facets = space.mesh.elem_facets[e]
    blocks = [np.eye(nvol)]
    cdofs = []
    for f in facets:
        blocks.append(space.facet_transforms[f])
        sl = space.cdof_slice(f)
        cdofs.append(np.arange(sl.start, sl.stop))
    n = sum(b.shape[0] for b in blocks)
    m = sum(b.shape[1] for b in blocks)
    T = np.zeros((n, m))
    r = c = 0
    for b in blocks:
        T[r:r + b.shape[0], c:c + b.shape[1]] = b
        r += b.shape[0]
        c += b.shape[1]
    return T, np.concatenate(cdofs)


def _condense(space, matrix_fn, rhs_fn, label: str) -> CondensedSystem:
    nvol = space.vol_block
    rows, cols, vals = [], [], []
    g = np.zeros(space.n_cdofs, dtype=complex)
    local = []
    for e in range(space.mesh.n_elements):
        A = matrix_fn(e)
        b = rhs_fn(e)
        T, cdofs = _local_transform(space, e)
        Ac = T.T @ A @ T
        bc = T.T @ b
        att = Ac[:nvol, :nvol]
        atf = Ac[:nvol, nvol:]
        aft = Ac[nvol:, :nvol]
        aff = Ac[nvol:, nvol:]
        try:
            fac = DenseFactor(att)
        except SingularMatrixError as exc:
            raise SingularMatrixError(
                f"singular volume block on element {e} ({label}): {exc}"
            ) from exc
        X = fac.solve(atf)
        y = fac.solve(bc[:nvol])
        S_loc = aff - aft @ X
        g_loc = bc[nvol:] - aft @ y
        idx = cdofs
        rows.append(np.repeat(idx, len(idx)))
        cols.append(np.tile(idx, len(idx)))
        vals.append(S_loc.reshape(-1))
        np.add.at(g, idx, g_loc)
        local.append(LocalElimination(fac, atf, bc[:nvol], cdofs))
    S = sps.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(space.n_cdofs, space.n_cdofs),
        dtype=complex,
    ).tocsr()
    S.sum_duplicates()
    return CondensedSystem(space=space, S=S, g=g, local=local,
                           n_cdofs=space.n_cdofs)


def assemble_condensed(space: HdgSpace, coeffs: CoefficientSet,
                       options: FormOptions, f_field) -> CondensedSystem:
    """Schur-complement skeleton system S = A_FF - A_Ft A_tt^-1 A_tF with
    load g = b_F - A_Ft A_tt^-1 b_t, boundary constraints applied."""
    kern = ElementKernels(space, coeffs, options)
    return _condense(
        space,
        kern.element_matrix,
        lambda e: kern.element_rhs(e, f_field),
        "main form",
    )


def assemble_gram_condensed(space: HdgSpace, coeffs: CoefficientSet,
                            options: FormOptions, u_field) -> CondensedSystem:
    """Condensed energy Gram system for best-approximation projections;
    the right side pairs an analytic field with the local basis."""
    kern = ElementKernels(space, coeffs, options)
    return _condense(
        space,
        kern.gram_block,
        lambda e: kern.gram_rhs(e, u_field),
        "energy product",
    )


def assemble_full(space: HdgSpace, coeffs: CoefficientSet,
                  options: FormOptions, f_field) -> FullSystem:
    """Uncondensed system over all volume dofs plus free facet dofs, with
    the same physics and constraints (oracle path)."""
    kern = ElementKernels(space, coeffs, options)
    nvol = space.vol_block
    n = space.n_vol_dofs + space.n_cdofs
    rows, cols, vals = [], [], []
    g = np.zeros(n, dtype=complex)
    for e in range(space.mesh.n_elements):
        A = kern.element_matrix(e)
        b = kern.element_rhs(e, f_field)
        T, cdofs = _local_transform(space, e)
        Ac = T.T @ A @ T
        bc = T.T @ b
        idx = np.concatenate(
            [np.arange(e * nvol, (e + 1) * nvol), space.n_vol_dofs + cdofs]
        )
        rows.append(np.repeat(idx, len(idx)))
        cols.append(np.tile(idx, len(idx)))
        vals.append(Ac.reshape(-1))
        np.add.at(g, idx, bc)
    S = sps.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n),
        dtype=complex,
    ).tocsr()
    S.sum_duplicates()
    return FullSystem(space=space, S=S, g=g, n_dofs=n)


def recover_interior(sys: CondensedSystem,
                     facet_solution: np.ndarray) -> DiscreteFunction:
    """Local back-substitution u_t = A_tt^-1 (b_t - A_tF u_F) per element,
    assembled into a full discrete function."""
    space = sys.space
    u = DiscreteFunction.zero(space)
    u.coefficients[space.n_vol_dofs:] = space.expand_facet_solution(
        facet_solution
    )
    for e, loc in enumerate(sys.local):
        uf = facet_solution[loc.cdofs]
        ut = loc.factor.solve(loc.b_t - loc.a_tf @ uf)
        u.coefficients[space.vol_slice(e)] = ut
    return u


def solve_condensed(sys: CondensedSystem) -> tuple[DiscreteFunction, SolveInfo]:
    x, info = sparse_solve(sys.S, sys.g)
    return recover_interior(sys, x), info


def solve_full(full: FullSystem) -> tuple[DiscreteFunction, SolveInfo]:
    x, info = sparse_solve(full.S, full.g)
    space = full.space
    u = DiscreteFunction.zero(space)
    u.coefficients[: space.n_vol_dofs] = x[: space.n_vol_dofs]
    u.coefficients[space.n_vol_dofs:] = space.expand_facet_solution(
        x[space.n_vol_dofs:]
    )
    return u, info


def cost_report(space: HdgSpace, sys: CondensedSystem) -> tuple[int, int, int]:
    """(ndofs, ncdofs, nze): total unknowns, coupled skeleton unknowns and
    nonzero entries of the condensed matrix."""
    return (space.total_dofs, space.n_cdofs, sys.nze)


def export_matrix_market(sys, path) -> None:
    """Matrix Market coordinate export (complex general) for external
    validation."""
    from scipy.io import mmwrite

    mmwrite(str(path), sps.coo_matrix(sys.S))
