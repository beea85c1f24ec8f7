"""The HDG product space: vector volume polynomials per element plus
vector facet polynomials on the skeleton.

DOF layout: all volume blocks first (per element: x-component modes, then
y-component modes), then all facet blocks (per facet: x modes, y modes).
Facet polynomials are parameterized by arclength pullback to [0, 1],
oriented from the lower to the higher global vertex index, so both adjacent
elements see identical facet functions.

The boundary condition nu . u = 0 is imposed strongly on facet unknowns:
boundary facet dofs are rotated into a (tangent, normal) frame and the
normal modes are eliminated from the coupled system.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .mesh import Mesh
from .refelem import (
    quad_segment,
    quad_triangle,
    segment_basis,
    triangle_basis,
    triangle_dim,
)

# reference triangle vertices, edge le connects _REF_EDGES[le]
_REF_VERTS = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
_REF_EDGES = ((0, 1), (1, 2), (2, 0))

DEFAULT_QUAD_MARGIN = 4


class HdgSpace:
    """Discrete space of piecewise polynomial vector fields: degree k on
    elements, degree k_facet on facets, lifting degree l_lift."""

    def __init__(self, mesh: Mesh, k: int, k_facet: int | None = None,
                 l_lift: int | None = None, flow=None,
                 flow_tol: float = 1e-12, flow_rho=None):
        if k < 1:
            raise ValueError("volume degree k must be >= 1")
        if k_facet is None:
            k_facet = k
        if l_lift is None:
            l_lift = k_facet
        if k_facet not in (k, k - 1):
            raise ValueError("k_facet must be k or k-1")
        if l_lift not in (k, k - 1):
            raise ValueError("l_lift must be k or k-1")
        self.mesh = mesh
        self.k = k
        self.k_facet = k_facet
        self.l_lift = l_lift
        self.nb_vol = triangle_dim(k)  # scalar modes per element
        self.nb_facet = k_facet + 1  # scalar modes per facet
        self.vol_block = 2 * self.nb_vol
        self.facet_block = 2 * self.nb_facet
        self.n_vol_dofs = mesh.n_elements * self.vol_block
        self.n_facet_dofs = mesh.n_facets * self.facet_block
        self.total_dofs = self.n_vol_dofs + self.n_facet_dofs
        self._build_geometry()
        self._build_constraints(flow, flow_tol, flow_rho)

    # ---- geometry ---------------------------------------------------------

    def _build_geometry(self):
        m = self.mesh
        v = m.vertices
        t = m.triangles
        p0, p1, p2 = v[t[:, 0]], v[t[:, 1]], v[t[:, 2]]
        J = np.empty((m.n_elements, 2, 2))
        J[:, :, 0] = p1 - p0
        J[:, :, 1] = p2 - p0
        self.jac = J
        self.detj = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
        inv = np.empty_like(J)
        inv[:, 0, 0] = J[:, 1, 1]
        inv[:, 0, 1] = -J[:, 0, 1]
        inv[:, 1, 0] = -J[:, 1, 0]
        inv[:, 1, 1] = J[:, 0, 0]
        self.jacinv = inv / self.detj[:, None, None]
        self.elem_origin = p0

    def map_to_physical(self, e: int, ref_pts) -> np.ndarray:
        ref_pts = np.atleast_2d(ref_pts)
        return self.elem_origin[e] + ref_pts @ self.jac[e].T

    def edge_ref_points(self, e: int, local_edge: int, t) -> np.ndarray:
        """Reference coordinates on a local edge for global facet
        parameters t in [0, 1] (low to high global vertex index)."""
        a, b = _REF_EDGES[local_edge]
        if self.mesh.elem_facet_signs[e, local_edge] < 0:
            a, b = b, a
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return _REF_VERTS[a] + t[:, None] * (_REF_VERTS[b] - _REF_VERTS[a])

    # ---- dof numbering -----------------------------------------------------

    def vol_slice(self, e: int) -> slice:
        return slice(e * self.vol_block, (e + 1) * self.vol_block)

    def facet_slice(self, f: int) -> slice:
        off = self.n_vol_dofs + f * self.facet_block
        return slice(off, off + self.facet_block)

    def element_dofs(self, e: int) -> np.ndarray:
        """Global indices of the local system: volume block then the three
        facet blocks in local edge order."""
        idx = [np.arange(self.vol_block) + e * self.vol_block]
        for f in self.mesh.elem_facets[e]:
            off = self.n_vol_dofs + f * self.facet_block
            idx.append(np.arange(self.facet_block) + off)
        return np.concatenate(idx)

    # ---- boundary constraints ----------------------------------------------

    def _build_constraints(self, flow=None, flow_tol: float = 1e-12,
                           flow_rho=None):
        """Per-facet frame transforms for the coupled (skeleton) system.

        Interior facet without flow information: identity on its
        2(k_facet+1) dofs. Boundary facet: no coupled unknowns at all.
        The normal modes are removed by the boundary condition, and the
        tangential modes never enter the form (facet unknowns appear only
        through the normal jump, which ignores them, and the b-weighted
        jump, which vanishes on the boundary), so keeping them would
        leave zero rows in the skeleton system.

        When a background flow is supplied, the tangential facet modes are
        screened per facet: they couple only through the b-weighted jump,
        i.e. through the moments of rho (b . nu) times the mode against
        the lifting trace space. Modes in the numerical null space of
        that moment operator (all of them where b . nu vanishes
        identically, and single parity-locked modes where rho (b . nu)
        has a symmetric zero crossing) are invisible to the form and the
        energy norm alike and would make the skeleton system exactly
        singular, so they are dropped. The kept frame is [nu-aligned
        modes | tau-aligned controllable combinations]."""
        m = self.mesh
        nfb = self.nb_facet
        eye = np.eye(2 * nfb)
        empty = np.zeros((2 * nfb, 0))

        moments = None
        if flow is not None:
            rule = quad_segment(2 * self.k + 4)
            v = m.vertices[m.facet_vertices]
            a, d = v[:, 0], v[:, 1] - v[:, 0]
            pts = (
                a[:, None, :] + rule.points[None, :, None] * d[:, None, :]
            ).reshape(-1, 2)
            bv = np.asarray(flow.value(pts))
            bn = np.einsum(
                "fqi,fi->fq", bv.reshape(m.n_facets, -1, 2), m.facet_normals
            )
            if flow_rho is not None:
                bn = bn * np.asarray(flow_rho.value(pts)).reshape(
                    m.n_facets, -1
                )
            S = segment_basis(self.k_facet).eval(rule.points)  # (nfb, nq)
            L = segment_basis(self.l_lift).eval(rule.points)
            w = rule.weights
            # per facet: (l_lift+1, nfb) weighted moment matrix
            moments = np.einsum(
                "lq,fq,nq->fln", L, bn * w[None, :], S
            )
            sref = float(np.max(np.abs(moments))) if m.n_facets else 0.0

        counts = np.empty(m.n_facets, dtype=np.int64)
        self.facet_transforms = []
        for f in range(m.n_facets):
            if m.facet_is_boundary[f]:
                counts[f] = 0
                self.facet_transforms.append(empty)
            elif moments is None:
                counts[f] = 2 * nfb
                self.facet_transforms.append(eye)
            else:
                _, sv, Vt = np.linalg.svd(moments[f])
                r = int(np.sum(sv > flow_tol * max(sref, flow_tol)))
                V = Vt[:r].T  # controllable tangential combinations
                nu = m.facet_normals[f]
                tau = np.array([-nu[1], nu[0]])
                T = np.zeros((2 * nfb, nfb + r))
                T[:nfb, :nfb] = nu[0] * np.eye(nfb)
                T[nfb:, :nfb] = nu[1] * np.eye(nfb)
                T[:nfb, nfb:] = tau[0] * V
                T[nfb:, nfb:] = tau[1] * V
                counts[f] = nfb + r
                self.facet_transforms.append(T)
        self.facet_free_counts = counts
        self.cdof_offsets = np.concatenate([[0], np.cumsum(counts)])
        self.n_cdofs = int(self.cdof_offsets[-1])

    def cdof_slice(self, f: int) -> slice:
        return slice(int(self.cdof_offsets[f]), int(self.cdof_offsets[f + 1]))

    def expand_facet_solution(self, x: np.ndarray) -> np.ndarray:
        """Maps a coupled-system vector (free facet dofs) to the full
        facet dof portion (boundary normal components zero)."""
        out = np.zeros(self.n_facet_dofs, dtype=complex)
        for f in range(self.mesh.n_facets):
            T = self.facet_transforms[f]
            loc = x[self.cdof_slice(f)]
            off = f * self.facet_block
            out[off:off + self.facet_block] = T @ loc
        return out

    # ---- evaluation ---------------------------------------------------------

    def evaluate(self, u: "DiscreteFunction", e: int, ref_pts) -> np.ndarray:
        """Volume part at reference points, shape (npts, 2)."""
        vals = triangle_basis(self.k).eval(np.atleast_2d(ref_pts))
        cx, cy = self._vol_coeffs(u, e)
        return np.stack([cx @ vals, cy @ vals], axis=-1)

    def evaluate_grad(self, u: "DiscreteFunction", e: int, ref_pts) -> np.ndarray:
        """Physical Jacobian of the volume part, shape (npts, 2, 2)."""
        gx, gy = triangle_basis(self.k).eval_grad(np.atleast_2d(ref_pts))
        Ji = self.jacinv[e]
        px = Ji[0, 0] * gx + Ji[1, 0] * gy  # d/dx_phys
        py = Ji[0, 1] * gx + Ji[1, 1] * gy
        cx, cy = self._vol_coeffs(u, e)
        out = np.empty((px.shape[1], 2, 2), dtype=complex)
        out[:, 0, 0] = cx @ px
        out[:, 0, 1] = cx @ py
        out[:, 1, 0] = cy @ px
        out[:, 1, 1] = cy @ py
        return out

    def evaluate_div(self, u: "DiscreteFunction", e: int, ref_pts) -> np.ndarray:
        j = self.evaluate_grad(u, e, ref_pts)
        return j[:, 0, 0] + j[:, 1, 1]

    def evaluate_facet(self, u: "DiscreteFunction", f: int, t) -> np.ndarray:
        """Facet part at parameters t, shape (npts, 2)."""
        vals = segment_basis(self.k_facet).eval(t)
        sl = self.facet_slice(f)
        c = u.coefficients[sl]
        cx, cy = c[: self.nb_facet], c[self.nb_facet:]
        return np.stack([cx @ vals, cy @ vals], axis=-1)

    def _vol_coeffs(self, u, e):
        c = u.coefficients[self.vol_slice(e)]
        return c[: self.nb_vol], c[self.nb_vol:]

    def hdg_jump(self, u: "DiscreteFunction", e: int, local_edge: int, t):
        """[[u]] = trace of the volume part minus the facet part, at
        facet parameters t on the given local edge."""
        f = self.mesh.elem_facets[e][local_edge]
        ref = self.edge_ref_points(e, local_edge, t)
        return self.evaluate(u, e, ref) - self.evaluate_facet(u, f, t)

    def hdg_jump_nu(self, u, e: int, local_edge: int, t):
        f = self.mesh.elem_facets[e][local_edge]
        nu = self.mesh.facet_unit_normal(f, e)
        return self.hdg_jump(u, e, local_edge, t) @ nu

    def hdg_jump_b(self, u, e: int, local_edge: int, t, b_field):
        """(b . nu) [[u]] at the facet quadrature parameters."""
        f = self.mesh.elem_facets[e][local_edge]
        nu = self.mesh.facet_unit_normal(f, e)
        ref = self.edge_ref_points(e, local_edge, t)
        phys = self.map_to_physical(e, ref)
        bn = b_field.value(phys) @ nu
        return bn[:, None] * self.hdg_jump(u, e, local_edge, t)


@dataclass
class DiscreteFunction:
    """Coefficient vector over an HdgSpace."""

    space: HdgSpace
    coefficients: np.ndarray

    def __post_init__(self):
        self.coefficients = np.asarray(self.coefficients, dtype=complex)
        if self.coefficients.shape != (self.space.total_dofs,):
            raise ValueError("coefficient length does not match space")

    @classmethod
    def zero(cls, space: HdgSpace) -> "DiscreteFunction":
        return cls(space, np.zeros(space.total_dofs, dtype=complex))

    def copy(self) -> "DiscreteFunction":
        return DiscreteFunction(self.space, self.coefficients.copy())


def build_space(mesh: Mesh, k: int, k_facet: int | None = None,
                l: int | None = None, flow=None, flow_rho=None) -> HdgSpace:
    return HdgSpace(mesh, k, k_facet, l, flow=flow, flow_rho=flow_rho)


def interpolate(f, space: HdgSpace,
                quad_margin: int = DEFAULT_QUAD_MARGIN) -> DiscreteFunction:
    """Elementwise L2 projection of an analytic vector field onto the
    volume space and facetwise L2 projection of its trace onto the facet
    space. Orthonormal reference bases make both projections explicit."""
    m = space.mesh
    k = space.k
    rule = quad_triangle(2 * k + quad_margin)
    basis = triangle_basis(k).eval(rule.points)  # (nb, nq)
    wb = basis * rule.weights  # projection weights
    u = DiscreteFunction.zero(space)

    # all physical volume quadrature points in one batch
    nq = rule.npoints
    phys = (
        space.elem_origin[:, None, :]
        + np.einsum("eij,qj->eqi", space.jac, rule.points)
    ).reshape(-1, 2)
    fv = np.asarray(f.value(phys), dtype=complex).reshape(m.n_elements, nq, 2)
    # mass matrix is |detJ| I, the |detJ| metric factor cancels
    cx = np.einsum("bq,eq->eb", wb, fv[:, :, 0])
    cy = np.einsum("bq,eq->eb", wb, fv[:, :, 1])
    vol = np.concatenate([cx, cy], axis=1).reshape(-1)
    u.coefficients[: space.n_vol_dofs] = vol

    srule = quad_segment(2 * k + quad_margin)
    sbasis = segment_basis(space.k_facet).eval(srule.points)
    swb = sbasis * srule.weights
    v = m.vertices
    a = v[m.facet_vertices[:, 0]]
    d = v[m.facet_vertices[:, 1]] - a
    fpts = (a[:, None, :] + srule.points[None, :, None] * d[:, None, :]).reshape(-1, 2)
    fvals = np.asarray(f.value(fpts), dtype=complex).reshape(m.n_facets, -1, 2)
    fcx = np.einsum("bq,fq->fb", swb, fvals[:, :, 0])
    fcy = np.einsum("bq,fq->fb", swb, fvals[:, :, 1])
    u.coefficients[space.n_vol_dofs:] = np.concatenate(
        [fcx, fcy], axis=1
    ).reshape(-1)
    return u


def facet_average_project(u: DiscreteFunction) -> DiscreteFunction:
    """Replaces the facet part by the L2 projection of the averaged
    element traces; useful to build conforming-trace test functions."""
    space = u.space
    m = space.mesh
    srule = quad_segment(2 * space.k + DEFAULT_QUAD_MARGIN)
    sbasis = segment_basis(space.k_facet).eval(srule.points)
    swb = sbasis * srule.weights
    out = u.copy()
    for f in range(m.n_facets):
        adj = m.facet_adj[f]
        tr = np.zeros((srule.npoints, 2), dtype=complex)
        for e in adj:
            le = list(m.elem_facets[e]).index(f)
            ref = space.edge_ref_points(e, le, srule.points)
            tr += space.evaluate(u, e, ref)
        tr /= len(adj)
        sl = space.facet_slice(f)
        out.coefficients[sl] = np.concatenate([swb @ tr[:, 0], swb @ tr[:, 1]])
    return out


def apply_normal_bc(u: DiscreteFunction) -> DiscreteFunction:
    """Zeroes the normal component of the facet part on boundary facets
    (the strong form of nu . u = 0 for the skeleton unknowns)."""
    space = u.space
    m = space.mesh
    out = u.copy()
    nfb = space.nb_facet
    for f in np.flatnonzero(m.facet_is_boundary):
        nx, ny = m.facet_normals[f]
        sl = space.facet_slice(f)
        c = out.coefficients[sl]
        cx, cy = c[:nfb].copy(), c[nfb:].copy()
        normal_part = nx * cx + ny * cy
        c[:nfb] = cx - nx * normal_part
        c[nfb:] = cy - ny * normal_part
        out.coefficients[sl] = c
    return out


# ---- serialization --------------------------------------------------------

_MAGIC = b"HDGF1\x00"


def save_function(u: DiscreteFunction, path) -> None:
    """Binary format: magic, little-endian int64 (k, k_facet, ndofs),
    8-byte mesh digest, then interleaved re/im doubles."""
    sp = u.space
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<qqq", sp.k, sp.k_facet, sp.total_dofs))
        fh.write(sp.mesh.content_hash())
        inter = np.empty(2 * sp.total_dofs)
        inter[0::2] = u.coefficients.real
        inter[1::2] = u.coefficients.imag
        fh.write(inter.astype("<f8").tobytes())


def load_function(space: HdgSpace, path) -> DiscreteFunction:
    with open(path, "rb") as fh:
        if fh.read(len(_MAGIC)) != _MAGIC:
            raise ValueError("not a discrete-function file")
        k, k_facet, ndofs = struct.unpack("<qqq", fh.read(24))
        digest = fh.read(8)
        if (k, k_facet) != (space.k, space.k_facet):
            raise ValueError("space signature mismatch")
        if ndofs != space.total_dofs:
            raise ValueError("dof count mismatch")
        if digest != space.mesh.content_hash():
            raise ValueError("mesh mismatch")
        raw = np.frombuffer(fh.read(16 * ndofs), dtype="<f8")
    return DiscreteFunction(space, raw[0::2] + 1j * raw[1::2])
