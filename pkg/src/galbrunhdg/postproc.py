"""Error measurement in the discrete energy distance, convergence-rate
tables, best-approximation projections in the energy inner product, and
evaluation of discrete functions at arbitrary physical points.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .assembly import assemble_gram_condensed, solve_condensed
from .coeffs import CoefficientSet
from .fespace import DiscreteFunction, HdgSpace
from .forms import ElementKernels, FormOptions


@dataclass(frozen=True)
class ErrorBreakdown:
    """Squared-term decomposition of the energy distance:

    total^2 = ||(c^2 rho)^1/2 (div u - div_n u_n)||^2 + ||u - u_t||^2
            + ||rho^1/2 (d_b u - D_b u_n)||^2
            + ||(c^2 rho)^1/2 h^-1/2 [[u_n]]_nu||^2."""

    div_term: float
    l2_term: float
    conv_term: float
    jump_term: float

    @property
    def total(self) -> float:
        return float(
            np.sqrt(
                self.div_term**2
                + self.l2_term**2
                + self.conv_term**2
                + self.jump_term**2
            )
        )


def dn_error(u_ex, u_n: DiscreteFunction, coeffs: CoefficientSet,
             options: FormOptions = FormOptions(),
             kernels: Optional[ElementKernels] = None) -> ErrorBreakdown:
    """Energy distance between an analytic field (value + Jacobian) and a
    discrete function, with the discrete divergence and convective
    derivative including their lifting contributions."""
    space = u_n.space
    kern = kernels if kernels is not None else ElementKernels(
        space, coeffs, options
    )
    sq = np.zeros(4)
    for e in range(space.mesh.n_elements):
        U = u_n.coefficients[space.element_dofs(e)]
        Ex, Ey, DIV, Bx, By, _, _ = kern._vol_ops(e)
        lift = kern.lifting_map(e)
        slift = kern.scalar_lifting_map(e)
        divn = (DIV + kern.Vl.T @ slift.ls) @ U
        dbx = (Bx + kern.Vl.T @ lift.lx) @ U
        dby = (By + kern.Vl.T @ lift.ly) @ U
        uvx = Ex @ U
        uvy = Ey @ U

        pts = kern._phys_v[e]
        uex = np.asarray(u_ex.value(pts), dtype=complex)
        jex = np.asarray(u_ex.jacobian(pts), dtype=complex)
        div_ex = jex[:, 0, 0] + jex[:, 1, 1]
        b = kern.b_v[e].astype(complex)
        db_ex = np.einsum("qij,qj->qi", jex, b)

        w = kern._wvol(e)
        wc = kern.cs2_v[e] * kern.rho_v[e] * w
        wr = kern.rho_v[e] * w
        sq[0] += np.sum(wc * np.abs(div_ex - divn) ** 2)
        sq[1] += np.sum(
            w * (np.abs(uex[:, 0] - uvx) ** 2 + np.abs(uex[:, 1] - uvy) ** 2)
        )
        sq[2] += np.sum(
            wr
            * (np.abs(db_ex[:, 0] - dbx) ** 2 + np.abs(db_ex[:, 1] - dby) ** 2)
        )
        for le in range(3):
            ed = kern._edge_ops(e, le)
            jn = ed["Jnu"] @ U
            wf = kern.cs2_f[ed["f"]] * kern.rho_f[ed["f"]] * ed["w"]
            sq[3] += np.sum(wf / ed["h_F"] * np.abs(jn) ** 2)
    return ErrorBreakdown(*np.sqrt(sq))


def xt_error(u_ex, u_n: DiscreteFunction, coeffs: CoefficientSet,
             options: FormOptions = FormOptions(),
             kernels: Optional[ElementKernels] = None) -> ErrorBreakdown:
    """Broken-norm distance between an analytic field and the volume part
    of a discrete function: weighted divergence, L2 and convective terms
    of the plain broken derivatives, plus the normal-jump seminorm. Unlike
    the energy distance, no lifting corrections enter, so reduced-degree
    liftings do not cap the observable convergence rate."""
    space = u_n.space
    kern = kernels if kernels is not None else ElementKernels(
        space, coeffs, options
    )
    sq = np.zeros(4)
    for e in range(space.mesh.n_elements):
        U = u_n.coefficients[space.element_dofs(e)]
        Ex, Ey, DIV, Bx, By, _, _ = kern._vol_ops(e)
        divn = DIV @ U
        dbx = Bx @ U
        dby = By @ U
        uvx = Ex @ U
        uvy = Ey @ U

        pts = kern._phys_v[e]
        uex = np.asarray(u_ex.value(pts), dtype=complex)
        jex = np.asarray(u_ex.jacobian(pts), dtype=complex)
        div_ex = jex[:, 0, 0] + jex[:, 1, 1]
        b = kern.b_v[e].astype(complex)
        db_ex = np.einsum("qij,qj->qi", jex, b)

        w = kern._wvol(e)
        wc = kern.cs2_v[e] * kern.rho_v[e] * w
        wr = kern.rho_v[e] * w
        sq[0] += np.sum(wc * np.abs(div_ex - divn) ** 2)
        sq[1] += np.sum(
            w * (np.abs(uex[:, 0] - uvx) ** 2 + np.abs(uex[:, 1] - uvy) ** 2)
        )
        sq[2] += np.sum(
            wr
            * (np.abs(db_ex[:, 0] - dbx) ** 2 + np.abs(db_ex[:, 1] - dby) ** 2)
        )
        for le in range(3):
            ed = kern._edge_ops(e, le)
            jn = ed["Jnu"] @ U
            wf = kern.cs2_f[ed["f"]] * kern.rho_f[ed["f"]] * ed["w"]
            sq[3] += np.sum(wf / ed["h_F"] * np.abs(jn) ** 2)
    return ErrorBreakdown(*np.sqrt(sq))


def eoc(errors, h):
    """Per-level convergence rates log(e_{i-1}/e_i) / log(h_{i-1}/h_i);
    the first entry and entries with nonpositive errors are None."""
    if len(errors) != len(h) or len(errors) < 2:
        raise ValueError("need matching error/h sequences of length >= 2")
    rates = [None]
    for i in range(1, len(errors)):
        if errors[i] <= 0 or errors[i - 1] <= 0:
            rates.append(None)
        else:
            rates.append(
                float(np.log(errors[i - 1] / errors[i]) / np.log(h[i - 1] / h[i]))
            )
    return rates


def best_approx(u_ref, space: HdgSpace, coeffs: CoefficientSet,
                options: FormOptions = FormOptions()) -> DiscreteFunction:
    """Galerkin projection of a field (value + Jacobian) onto the discrete
    space in the weighted energy inner product, via the condensed Gram
    system."""
    sys = assemble_gram_condensed(space, coeffs, options, u_ref)
    u, _ = solve_condensed(sys)
    return u


class DiscreteField:
    """Adapter exposing a discrete function on its own mesh as a field
    over physical points (value, jacobian), with point location by
    barycentric containment. Points outside the mesh are rejected."""

    def __init__(self, u: DiscreteFunction, tol: float = 1e-12):
        self.u = u
        self.space = u.space
        self.tol = tol
        m = self.space.mesh
        self._origin = self.space.elem_origin
        self._jinv = self.space.jacinv

    def _locate(self, pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        pts = np.atleast_2d(pts)
        diff = pts[:, None, :] - self._origin[None, :, :]  # (np, ne, 2)
        ref = np.einsum("eji,pej->pei", self._jinv.transpose(0, 2, 1), diff)
        # barycentric containment with tolerance; ties resolved by the
        # largest margin so shared-edge points get a unique element
        margin = np.minimum(
            np.minimum(ref[:, :, 0], ref[:, :, 1]),
            1.0 - ref[:, :, 0] - ref[:, :, 1],
        )
        elem = np.argmax(margin, axis=1)
        best = margin[np.arange(len(pts)), elem]
        if np.any(best < -self.tol):
            raise ValueError("point outside the mesh")
        refpts = ref[np.arange(len(pts)), elem]
        return elem, np.clip(refpts, 0.0, 1.0)

    def value(self, pts) -> np.ndarray:
        pts = np.atleast_2d(pts)
        elem, ref = self._locate(pts)
        out = np.empty((len(pts), 2), dtype=complex)
        for e in np.unique(elem):
            mask = elem == e
            out[mask] = self.space.evaluate(self.u, int(e), ref[mask])
        return out

    def jacobian(self, pts) -> np.ndarray:
        pts = np.atleast_2d(pts)
        elem, ref = self._locate(pts)
        out = np.empty((len(pts), 2, 2), dtype=complex)
        for e in np.unique(elem):
            mask = elem == e
            out[mask] = self.space.evaluate_grad(self.u, int(e), ref[mask])
        return out


def raster_sample(u: DiscreteFunction, xs, ys, fill=np.nan) -> np.ndarray:
    """Samples the volume part on a tensor grid; points outside the mesh
    get the fill value. Returns an (ny, nx, 2) complex array."""
    field = DiscreteField(u)
    xv, yv = np.meshgrid(xs, ys, indexing="xy")
    pts = np.column_stack([xv.ravel(), yv.ravel()])
    out = np.full((len(pts), 2), fill, dtype=complex)
    try:
        vals = field.value(pts)
        out[:] = vals
    except ValueError:
        for i, p in enumerate(pts):
            try:
                out[i] = field.value(p[None, :])[0]
            except ValueError:
                pass
    return out.reshape(len(ys), len(xs), 2)
