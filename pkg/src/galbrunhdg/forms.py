"""Element-local matrices of the discrete sesquilinear form

    a_n = a_div - a_conv + a_rem

on the HDG space, together with the local lifting maps, the local energy
(Gram) matrix and local right-hand-side vectors.

Local dof order per element: volume x-modes, volume y-modes, then for each
of the three local edges the facet x-modes and y-modes. The matrix
convention is a(u, u') = u'^H A u (test function conjugated on the left).

The divergence form is assembled in its interior-penalty shape, which is
algebraically identical to the scalar-lifting formulation; note that the
stabilization s_n carries a deliberate minus sign, so the normal-jump
penalty enters a_div negatively. The convective form uses the vector
lifting in the discrete derivative D_b = d_b + R, or alternatively an
interior-penalty replacement with a tunable parameter lambda.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coeffs import CoefficientSet
from .fespace import HdgSpace
from .refelem import quad_segment, quad_triangle, segment_basis, triangle_basis
from .solver import DenseFactor


@dataclass(frozen=True)
class FormOptions:
    """alpha and lam are scaled by k^2 internally."""

    alpha: float = 100.0
    conv_mode: str = "lifting"  # or "sip"
    lam: float = 10.0
    quad_margin: int = 4

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.conv_mode not in ("lifting", "sip"):
            raise ValueError("conv_mode must be 'lifting' or 'sip'")
        if self.conv_mode == "sip" and self.lam <= 0:
            raise ValueError("lambda must be positive in sip mode")


@dataclass(frozen=True)
class LiftingMap:
    """Maps a local dof vector to the modal coefficients of the vector
    lifting R u in [P^l]^2 (per component), plus the evaluation table of
    the lifting basis at the volume quadrature points."""

    lx: np.ndarray  # (nl, N)
    ly: np.ndarray
    basis_vol: np.ndarray  # (nl, nq)


@dataclass(frozen=True)
class ScalarLiftingMap:
    ls: np.ndarray  # (nl, N)
    basis_vol: np.ndarray


def _acc(A, op_test, w, op_trial):
    A += op_test.conj().T @ (w[:, None] * op_trial)


class ElementKernels:
    """Precomputed reference tables and batched coefficient evaluations
    for assembling element matrices of a fixed (space, coefficients,
    options) triple."""

    def __init__(self, space: HdgSpace, coeffs: CoefficientSet,
                 options: FormOptions = FormOptions()):
        self.space = space
        self.coeffs = coeffs
        self.options = options
        k = space.k
        m = space.mesh
        margin = options.quad_margin
        self.alpha_eff = options.alpha * k * k
        self.lam_eff = options.lam * k * k

        self.vrule = quad_triangle(2 * k + margin)
        tb = triangle_basis(k)
        self.Vb, self.Gx, self.Gy = tb.eval_all(self.vrule.points)
        lb = triangle_basis(space.l_lift)
        self.Vl = lb.eval(self.vrule.points)
        self.nb = space.nb_vol
        self.nl = lb.dim
        self.nfb = space.nb_facet
        self.N = 2 * self.nb + 6 * self.nfb

        self.srule = quad_segment(2 * k + margin)
        self.S = segment_basis(space.k_facet).eval(self.srule.points)
        # volume/lifting basis traces per (local edge, orientation sign)
        self.trace = {}
        for le in range(3):
            for sign in (1, -1):
                ref = _edge_ref(le, sign, self.srule.points)
                v, gx, gy = tb.eval_all(ref)
                self.trace[(le, sign)] = (v, gx, gy, lb.eval(ref))

        # batched coefficient evaluation at volume points
        nq = self.vrule.npoints
        phys = (
            space.elem_origin[:, None, :]
            + np.einsum("eij,qj->eqi", space.jac, self.vrule.points)
        ).reshape(-1, 2)
        ne = m.n_elements
        self.rho_v = coeffs.rho.value(phys).reshape(ne, nq)
        self.cs2_v = coeffs.cs2.value(phys).reshape(ne, nq)
        self.gp_v = coeffs.p.gradient(phys).reshape(ne, nq, 2)
        self.hp_v = coeffs.p.hess(phys).reshape(ne, nq, 2, 2)
        self.hphi_v = coeffs.phi.hess(phys).reshape(ne, nq, 2, 2)
        self.gam_v = coeffs.gamma.value(phys).reshape(ne, nq)
        self.b_v = coeffs.b.value(phys).reshape(ne, nq, 2)
        self._phys_v = phys.reshape(ne, nq, 2)

        # batched coefficient evaluation at facet quadrature points
        v = m.vertices
        a = v[m.facet_vertices[:, 0]]
        d = v[m.facet_vertices[:, 1]] - a
        nqf = self.srule.npoints
        fpts = (
            a[:, None, :] + self.srule.points[None, :, None] * d[:, None, :]
        ).reshape(-1, 2)
        nf = m.n_facets
        self.rho_f = coeffs.rho.value(fpts).reshape(nf, nqf)
        self.cs2_f = coeffs.cs2.value(fpts).reshape(nf, nqf)
        self.gp_f = coeffs.p.gradient(fpts).reshape(nf, nqf, 2)
        self.b_f = coeffs.b.value(fpts).reshape(nf, nqf, 2)
        self._phys_f = fpts.reshape(nf, nqf, 2)

    # ---- local operator tables -------------------------------------------

    def _vol_ops(self, e: int):
        """Value, divergence and b-derivative operators at the volume
        quadrature points, each (nq, N)."""
        nb, N = self.nb, self.N
        nq = self.vrule.npoints
        Ji = self.space.jacinv[e]
        Px = Ji[0, 0] * self.Gx + Ji[1, 0] * self.Gy
        Py = Ji[0, 1] * self.Gx + Ji[1, 1] * self.Gy
        Ex = np.zeros((nq, N))
        Ey = np.zeros((nq, N))
        Ex[:, :nb] = self.Vb.T
        Ey[:, nb:2 * nb] = self.Vb.T
        DIV = np.zeros((nq, N))
        DIV[:, :nb] = Px.T
        DIV[:, nb:2 * nb] = Py.T
        b = self.b_v[e]
        Bd = (b[:, 0, None] * Px.T + b[:, 1, None] * Py.T)  # (nq, nb)
        Bx = np.zeros((nq, N))
        By = np.zeros((nq, N))
        Bx[:, :nb] = Bd
        By[:, nb:2 * nb] = Bd
        return Ex, Ey, DIV, Bx, By, Px, Py

    def _edge_ops(self, e: int, le: int):
        """Trace, jump and divergence-trace operators on local edge le,
        each (nqf, N), together with the facet id, normal and weights."""
        m = self.space.mesh
        f = m.elem_facets[e][le]
        sign = int(m.elem_facet_signs[e, le])
        nu = m.facet_unit_normal(f, e)
        v, gx, gy, vl = self.trace[(le, sign)]
        nb, nfb, N = self.nb, self.nfb, self.N
        nqf = self.srule.npoints
        Tx = np.zeros((nqf, N))
        Ty = np.zeros((nqf, N))
        Tx[:, :nb] = v.T
        Ty[:, nb:2 * nb] = v.T
        off = 2 * nb + le * 2 * nfb
        Fx = np.zeros((nqf, N))
        Fy = np.zeros((nqf, N))
        Fx[:, off:off + nfb] = self.S.T
        Fy[:, off + nfb:off + 2 * nfb] = self.S.T
        Jx = Tx - Fx
        Jy = Ty - Fy
        Jnu = nu[0] * Jx + nu[1] * Jy
        Ji = self.space.jacinv[e]
        Px = Ji[0, 0] * gx + Ji[1, 0] * gy
        Py = Ji[0, 1] * gx + Ji[1, 1] * gy
        DIVtr = np.zeros((nqf, N))
        DIVtr[:, :nb] = Px.T
        DIVtr[:, nb:2 * nb] = Py.T
        b = self.b_f[f]
        Bd = b[:, 0, None] * Px.T + b[:, 1, None] * Py.T
        Btrx = np.zeros((nqf, N))
        Btry = np.zeros((nqf, N))
        Btrx[:, :nb] = Bd
        Btry[:, nb:2 * nb] = Bd
        bn = b @ nu
        w = self.srule.weights * m.facet_h[f]
        return {
            "f": f, "nu": nu, "w": w, "bn": bn,
            "Tx": Tx, "Ty": Ty, "Jx": Jx, "Jy": Jy, "Jnu": Jnu,
            "DIVtr": DIVtr, "Btrx": Btrx, "Btry": Btry,
            "vl": vl, "h_F": m.facet_h[f],
        }

    def _wvol(self, e: int) -> np.ndarray:
        return self.vrule.weights * self.space.detj[e]

    # ---- liftings --------------------------------------------------------

    def lifting_map(self, e: int) -> LiftingMap:
        """Vector lifting: <rho R u, psi> = -<rho (b.nu) [[u]], psi> on
        the element boundary, per Cartesian component."""
        w = self._wvol(e)
        M = self.Vl @ ((self.rho_v[e] * w)[:, None] * self.Vl.T)
        Gxr = np.zeros((self.nl, self.N))
        Gyr = np.zeros((self.nl, self.N))
        for le in range(3):
            ed = self._edge_ops(e, le)
            wf = self.rho_f[ed["f"]] * ed["bn"] * ed["w"]
            Gxr -= ed["vl"] @ (wf[:, None] * ed["Jx"])
            Gyr -= ed["vl"] @ (wf[:, None] * ed["Jy"])
        fac = DenseFactor(M)
        return LiftingMap(lx=fac.solve(Gxr), ly=fac.solve(Gyr),
                          basis_vol=self.Vl)

    def scalar_lifting_map(self, e: int) -> ScalarLiftingMap:
        """Scalar lifting with weight c_s^2 rho against the normal jump;
        used for energy norms and as a cross-check of the interior-penalty
        shape of the divergence form."""
        w = self._wvol(e)
        wc = self.cs2_v[e] * self.rho_v[e] * w
        M = self.Vl @ (wc[:, None] * self.Vl.T)
        G = np.zeros((self.nl, self.N))
        for le in range(3):
            ed = self._edge_ops(e, le)
            wf = self.cs2_f[ed["f"]] * self.rho_f[ed["f"]] * ed["w"]
            G -= ed["vl"] @ (wf[:, None] * ed["Jnu"])
        return ScalarLiftingMap(ls=DenseFactor(M).solve(G), basis_vol=self.Vl)

    # ---- form blocks ------------------------------------------------------

    def div_block(self, e: int) -> np.ndarray:
        """Divergence form in interior-penalty shape (with the negative
        penalty inherited from s_n) plus the pressure-gradient couplings."""
        N = self.N
        A = np.zeros((N, N), dtype=complex)
        Ex, Ey, DIV, _, _, _, _ = self._vol_ops(e)
        w = self._wvol(e)
        wc = self.cs2_v[e] * self.rho_v[e] * w
        _acc(A, DIV, wc, DIV)
        gp = self.gp_v[e]
        P = gp[:, 0, None] * Ex + gp[:, 1, None] * Ey  # grad p . u at vol pts
        _acc(A, P, w.astype(complex), DIV)  # <div u, grad p . u'>
        _acc(A, DIV, w.astype(complex), P)  # <grad p . u, div u'>
        for le in range(3):
            ed = self._edge_ops(e, le)
            wf = self.cs2_f[ed["f"]] * self.rho_f[ed["f"]] * ed["w"]
            _acc(A, ed["DIVtr"], -wf, ed["Jnu"])
            _acc(A, ed["Jnu"], -wf, ed["DIVtr"])
            _acc(A, ed["Jnu"], -self.alpha_eff * wf / ed["h_F"], ed["Jnu"])
            # jump corrections of the lifted divergence in the grad p terms
            gpf = self.gp_f[ed["f"]]
            Ptr = gpf[:, 0, None] * ed["Tx"] + gpf[:, 1, None] * ed["Ty"]
            _acc(A, Ptr, -ed["w"].astype(complex), ed["Jnu"])
            _acc(A, ed["Jnu"], -ed["w"].astype(complex), Ptr)
        return A

    def conv_block(self, e: int,
                   lifting: LiftingMap | None = None) -> np.ndarray:
        """Convective form <rho L u, L u'> with L = omega + i D_b + i rot x
        and D_b = d_b + R; Hermitian positive semidefinite."""
        if lifting is None:
            lifting = self.lifting_map(e)
        Ex, Ey, _, Bx, By, _, _ = self._vol_ops(e)
        Rx = self.Vl.T @ lifting.lx  # lifting values at volume points
        Ry = self.Vl.T @ lifting.ly
        w = self.coeffs.omega
        rot = self.coeffs.rot
        Ax = w * Ex + 1j * (Bx + Rx) - 1j * rot * Ey
        Ay = w * Ey + 1j * (By + Ry) + 1j * rot * Ex
        wv = self.rho_v[e] * self._wvol(e)
        A = np.zeros((self.N, self.N), dtype=complex)
        _acc(A, Ax, wv, Ax)
        _acc(A, Ay, wv, Ay)
        return A

    def conv_block_sip(self, e: int) -> np.ndarray:
        """Interior-penalty replacement of the convective form: volume
        term without lifting, two consistency terms against the b-weighted
        jump, and a lambda-penalty (entering with the sign that makes the
        penalty positive inside a_n = ... - a_conv + ...)."""
        Ex, Ey, _, Bx, By, _, _ = self._vol_ops(e)
        w = self.coeffs.omega
        rot = self.coeffs.rot
        Lx = w * Ex + 1j * Bx - 1j * rot * Ey
        Ly = w * Ey + 1j * By + 1j * rot * Ex
        wv = self.rho_v[e] * self._wvol(e)
        A = np.zeros((self.N, self.N), dtype=complex)
        _acc(A, Lx, wv, Lx)
        _acc(A, Ly, wv, Ly)
        for le in range(3):
            ed = self._edge_ops(e, le)
            nu = ed["nu"]
            Ltrx = w * ed["Tx"] + 1j * ed["Btrx"] - 1j * rot * ed["Ty"]
            Ltry = w * ed["Ty"] + 1j * ed["Btry"] + 1j * rot * ed["Tx"]
            Jbx = ed["bn"][:, None] * ed["Jx"]
            Jby = ed["bn"][:, None] * ed["Jy"]
            wf = self.rho_f[ed["f"]] * ed["w"]
            for Ltr, Jb in ((Ltrx, Jbx), (Ltry, Jby)):
                A += 1j * Jb.conj().T @ (wf[:, None] * Ltr)
                A += 1j * Ltr.conj().T @ (wf[:, None] * Jb)
                _acc(A, Jb, -self.lam_eff * wf / ed["h_F"], Jb)
        return A

    def rem_block(self, e: int) -> np.ndarray:
        """Zeroth-order terms: (Hess p - rho Hess phi) mass coupling and
        the damping term -i omega <gamma rho u, u'>."""
        Ex, Ey = self._vol_ops(e)[:2]
        w = self._wvol(e)
        H = self.hp_v[e] - self.rho_v[e][:, None, None] * self.hphi_v[e]
        A = np.zeros((self.N, self.N), dtype=complex)
        E = (Ex, Ey)
        for i in range(2):
            for j in range(2):
                _acc(A, E[i], H[:, i, j].astype(complex) * w, E[j])
        wd = -1j * self.coeffs.omega * self.gam_v[e] * self.rho_v[e] * w
        _acc(A, Ex, wd, Ex)
        _acc(A, Ey, wd, Ey)
        return A

    def element_matrix(self, e: int) -> np.ndarray:
        """Full local matrix of a_n = a_div - a_conv + a_rem."""
        if self.options.conv_mode == "sip":
            conv = self.conv_block_sip(e)
        else:
            conv = self.conv_block(e)
        return self.div_block(e) - conv + self.rem_block(e)

    def element_rhs(self, e: int, f_field) -> np.ndarray:
        """Local load vector <f, u'>; facet entries are zero."""
        w = self._wvol(e)
        fv = np.asarray(f_field.value(self._phys_v[e]), dtype=complex)
        rhs = np.zeros(self.N, dtype=complex)
        nb = self.nb
        rhs[:nb] = self.Vb @ (fv[:, 0] * w)
        rhs[nb:2 * nb] = self.Vb @ (fv[:, 1] * w)
        return rhs

    def gram_block(self, e: int) -> np.ndarray:
        """Local matrix of the weighted energy inner product:
        <c^2 rho div_n u, div_n u'> + <u, u'> + <rho D_b u, D_b u'>
        + <c^2 rho h^-1 [[u]]_nu, [[u']]_nu>. Hermitian positive definite."""
        Ex, Ey, DIV, Bx, By, _, _ = self._vol_ops(e)
        lift = self.lifting_map(e)
        slift = self.scalar_lifting_map(e)
        DIVN = DIV + self.Vl.T @ slift.ls
        DBx = Bx + self.Vl.T @ lift.lx
        DBy = By + self.Vl.T @ lift.ly
        w = self._wvol(e)
        wc = self.cs2_v[e] * self.rho_v[e] * w
        wr = self.rho_v[e] * w
        A = np.zeros((self.N, self.N), dtype=complex)
        _acc(A, DIVN, wc, DIVN)
        _acc(A, Ex, w, Ex)
        _acc(A, Ey, w, Ey)
        _acc(A, DBx, wr, DBx)
        _acc(A, DBy, wr, DBy)
        for le in range(3):
            ed = self._edge_ops(e, le)
            wf = self.cs2_f[ed["f"]] * self.rho_f[ed["f"]] * ed["w"]
            _acc(A, ed["Jnu"], wf / ed["h_F"], ed["Jnu"])
        return A


    def gram_rhs(self, e: int, u_field) -> np.ndarray:
        """Local load vector of the energy inner product against an
        analytic field u (whose jumps vanish): <u, v>_energy tested with
        the local basis. Needs value and Jacobian of u."""
        Ex, Ey, DIV, Bx, By, _, _ = self._vol_ops(e)
        lift = self.lifting_map(e)
        slift = self.scalar_lifting_map(e)
        DIVN = DIV + self.Vl.T @ slift.ls
        DBx = Bx + self.Vl.T @ lift.lx
        DBy = By + self.Vl.T @ lift.ly
        w = self._wvol(e)
        wc = self.cs2_v[e] * self.rho_v[e] * w
        wr = self.rho_v[e] * w
        pts = self._phys_v[e]
        uv = np.asarray(u_field.value(pts), dtype=complex)
        ju = np.asarray(u_field.jacobian(pts), dtype=complex)
        divu = ju[:, 0, 0] + ju[:, 1, 1]
        dbu = np.einsum("qij,qj->qi", ju, self.b_v[e].astype(complex))
        rhs = DIVN.conj().T @ (wc * divu)
        rhs += Ex.conj().T @ (w * uv[:, 0]) + Ey.conj().T @ (w * uv[:, 1])
        rhs += DBx.conj().T @ (wr * dbu[:, 0]) + DBy.conj().T @ (wr * dbu[:, 1])
        return rhs


def _edge_ref(local_edge: int, sign: int, t: np.ndarray) -> np.ndarray:
    verts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    edges = ((0, 1), (1, 2), (2, 0))
    a, b = edges[local_edge]
    if sign < 0:
        a, b = b, a
    t = np.atleast_1d(np.asarray(t, dtype=float))
    return verts[a] + t[:, None] * (verts[b] - verts[a])


# ---- spec-level convenience wrappers (one-element use, e.g. in tests) ----


def local_lifting(e, space, coeffs, options=FormOptions()) -> LiftingMap:
    return ElementKernels(space, coeffs, options).lifting_map(e)


def local_scalar_lifting(e, space, coeffs,
                         options=FormOptions()) -> ScalarLiftingMap:
    return ElementKernels(space, coeffs, options).scalar_lifting_map(e)


def local_div_block(e, space, coeffs, options=FormOptions()) -> np.ndarray:
    return ElementKernels(space, coeffs, options).div_block(e)


def local_conv_block(e, space, coeffs, options=FormOptions()) -> np.ndarray:
    return ElementKernels(space, coeffs, options).conv_block(e)


def local_conv_block_sip(e, space, coeffs, lam: float) -> np.ndarray:
    opts = FormOptions(conv_mode="sip", lam=lam)
    return ElementKernels(space, coeffs, opts).conv_block_sip(e)


def local_rem_block(e, space, coeffs, options=FormOptions()) -> np.ndarray:
    return ElementKernels(space, coeffs, options).rem_block(e)


def combine(div_block, conv_block, rem_block) -> np.ndarray:
    return div_block - conv_block + rem_block


def local_rhs(e, space, coeffs, f_field, options=FormOptions()) -> np.ndarray:
    return ElementKernels(space, coeffs, options).element_rhs(e, f_field)
