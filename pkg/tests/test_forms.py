"""Element matrices: lifting identities, penalty-form identities,
symmetry/definiteness properties and degeneracy on conforming data."""

import numpy as np
import pytest
import sympy as sp

from galbrunhdg.coeffs import (
    CoefficientSet,
    background_flow,
    constant_scalar,
    preset,
    scalar_from_sympy,
    vector_from_sympy,
    zero_flow,
)
from galbrunhdg.fespace import HdgSpace, interpolate
from galbrunhdg.forms import (
    ElementKernels,
    FormOptions,
    combine,
    local_conv_block,
    local_div_block,
    local_lifting,
    local_rem_block,
)
from galbrunhdg.mesh import generate_square
from galbrunhdg.refelem import quad_segment, quad_triangle, triangle_basis

from conftest import random_function


@pytest.fixture(scope="module")
def setup():
    mesh = generate_square(3)
    base = preset("square-manufactured")
    flow = background_flow("stream", 0.3, base)
    coeffs = base.with_flow(flow)
    space = HdgSpace(mesh, 2, flow=flow)
    kern = ElementKernels(space, coeffs)
    return mesh, coeffs, space, kern


def constant_p_coeffs(flow):
    x, y = sp.symbols("x y", real=True)
    return CoefficientSet(
        rho=scalar_from_sympy(1 + sp.Rational(1, 2) * sp.exp(-x * y)),
        cs2=scalar_from_sympy(sp.Rational(3, 2) + x**2 / 4),
        p=constant_scalar(1.0),
        phi=constant_scalar(0.0),
        gamma=constant_scalar(0.1),
        b=flow,
        omega=3.0,
        rot=0.0,
    )


def test_form_options_validation():
    with pytest.raises(ValueError):
        FormOptions(alpha=0)
    with pytest.raises(ValueError):
        FormOptions(conv_mode="upwind")
    with pytest.raises(ValueError):
        FormOptions(conv_mode="sip", lam=-1)
    FormOptions(conv_mode="lifting", lam=-1)  # lam unused here


def polynomial_coeffs():
    """Low-degree polynomial data so that both the internal quadrature and
    the oracle quadrature are exact and the lifting identities hold to
    roundoff."""
    x, y = sp.symbols("x y", real=True)
    return CoefficientSet(
        rho=scalar_from_sympy(1 + (x + y) / 4),
        cs2=scalar_from_sympy(2 + (x - y) / 8),
        p=scalar_from_sympy(x * y / 3),
        phi=constant_scalar(0.0),
        gamma=constant_scalar(0.1),
        b=vector_from_sympy((x * y / 2, y * (1 - y))),
        omega=2.0,
        rot=0.0,
    )


def test_vector_lifting_defining_equation(setup, rng):
    """<rho R u, psi> = -<rho (b.nu) [[u]], psi> over the element boundary
    for every lifting-space test function, both sides by independent
    quadrature through the public evaluation API."""
    mesh, _, space, _ = setup
    coeffs = polynomial_coeffs()
    kern = ElementKernels(space, coeffs)
    u = random_function(space, rng)
    vr = quad_triangle(12)
    sr = quad_segment(12)
    lb = triangle_basis(space.l_lift)
    Psi = lb.eval(vr.points)  # (nl, nq)
    for e in (0, 7, mesh.n_elements - 1):
        lift = kern.lifting_map(e)
        U = u.coefficients[space.element_dofs(e)]
        rc = lift.lx @ U, lift.ly @ U  # modal coeffs of R u
        phys = space.map_to_physical(e, vr.points)
        w = vr.weights * space.detj[e]
        rho = coeffs.rho.value(phys)
        for comp in range(2):
            rvals = rc[comp] @ Psi
            lhs = Psi @ (rho * w * rvals)
            rhs = np.zeros(kern.nl, dtype=complex)
            for le in range(3):
                f = mesh.elem_facets[e][le]
                jb = space.hdg_jump_b(u, e, le, sr.points, coeffs.b)
                ref = space.edge_ref_points(e, le, sr.points)
                pf = space.map_to_physical(e, ref)
                wf = sr.weights * mesh.facet_h[f] * coeffs.rho.value(pf)
                rhs -= lb.eval(ref) @ (wf * jb[:, comp])
            assert np.max(np.abs(lhs - rhs)) < 1e-12 * max(
                1.0, np.max(np.abs(lhs))
            )


def test_scalar_lifting_defining_equation(setup, rng):
    """<c^2 rho R u, psi> = -<c^2 rho [[u]]_nu, psi>, same scheme."""
    mesh, _, space, _ = setup
    coeffs = polynomial_coeffs()
    kern = ElementKernels(space, coeffs)
    u = random_function(space, rng)
    vr = quad_triangle(12)
    sr = quad_segment(12)
    lb = triangle_basis(space.l_lift)
    Psi = lb.eval(vr.points)
    for e in (1, 5):
        slift = kern.scalar_lifting_map(e)
        c = slift.ls @ u.coefficients[space.element_dofs(e)]
        phys = space.map_to_physical(e, vr.points)
        w = vr.weights * space.detj[e]
        wc = coeffs.cs2.value(phys) * coeffs.rho.value(phys)
        lhs = Psi @ (wc * w * (c @ Psi))
        rhs = np.zeros(kern.nl, dtype=complex)
        for le in range(3):
            f = mesh.elem_facets[e][le]
            jn = space.hdg_jump_nu(u, e, le, sr.points)
            ref = space.edge_ref_points(e, le, sr.points)
            pf = space.map_to_physical(e, ref)
            wf = (
                sr.weights * mesh.facet_h[f]
                * coeffs.cs2.value(pf) * coeffs.rho.value(pf)
            )
            rhs -= lb.eval(ref) @ (wf * jn)
        assert np.max(np.abs(lhs - rhs)) < 1e-12 * max(
            1.0, np.max(np.abs(lhs))
        )


@pytest.mark.parametrize("reduced", [False, True])
def test_div_block_matches_scalar_lifting_form(reduced, rng):
    """The interior-penalty shape of the divergence form agrees with the
    scalar-lifting formulation
        <wc (div + R) u, (div + R) u'> - <wc R u, R u'> - penalty
    whenever div of the volume space lies in the lifting space."""
    mesh = generate_square(2)
    flow = background_flow("stream", 0.4, preset("square-manufactured"))
    coeffs = constant_p_coeffs(flow)
    k = 3
    if reduced:
        space = HdgSpace(mesh, k, k_facet=k - 1, l_lift=k - 1, flow=flow)
    else:
        space = HdgSpace(mesh, k, flow=flow)
    kern = ElementKernels(space, coeffs)
    for e in range(0, mesh.n_elements, 3):
        A = kern.div_block(e)
        _, _, DIV, _, _, _, _ = kern._vol_ops(e)
        Rs = kern.Vl.T @ kern.scalar_lifting_map(e).ls
        DIVN = DIV + Rs
        w = kern._wvol(e)
        wc = kern.cs2_v[e] * kern.rho_v[e] * w
        O = DIVN.conj().T @ (wc[:, None] * DIVN)
        O -= Rs.conj().T @ (wc[:, None] * Rs)
        for le in range(3):
            ed = kern._edge_ops(e, le)
            wf = kern.cs2_f[ed["f"]] * kern.rho_f[ed["f"]] * ed["w"]
            pen = kern.alpha_eff * wf / ed["h_F"]
            O = O - ed["Jnu"].conj().T @ (pen[:, None] * ed["Jnu"])
        scale = np.max(np.abs(A))
        assert np.max(np.abs(A - O)) < 1e-12 * scale


def test_conv_block_hermitian_psd(setup):
    _, _, _, kern = setup
    for e in (0, 4):
        A = kern.conv_block(e)
        assert np.max(np.abs(A - A.conj().T)) < 1e-10 * np.max(np.abs(A))
        lam = np.linalg.eigvalsh(0.5 * (A + A.conj().T))
        assert lam.min() > -1e-10 * lam.max()


def test_gram_block_hermitian_psd(setup):
    # element-local energy matrix is Hermitian PSD; tangential facet
    # modes on flow-dead facets are null directions locally and are
    # removed by the skeleton constraints in the assembled system
    _, _, _, kern = setup
    A = kern.gram_block(2)
    assert np.max(np.abs(A - A.conj().T)) < 1e-10 * np.max(np.abs(A))
    lam = np.linalg.eigvalsh(0.5 * (A + A.conj().T))
    assert lam.min() > -1e-12 * lam.max()


def test_conv_modes_coincide_without_flow():
    mesh = generate_square(2)
    base = preset("square-manufactured")
    coeffs = base.with_flow(zero_flow())
    space = HdgSpace(mesh, 2, flow=coeffs.b)
    kern = ElementKernels(space, coeffs, FormOptions(conv_mode="sip"))
    for e in (0, 3):
        A = kern.conv_block(e)
        B = kern.conv_block_sip(e)
        assert np.max(np.abs(A - B)) < 1e-12 * np.max(np.abs(A))


def test_element_matrix_combines_blocks(setup):
    mesh, coeffs, space, kern = setup
    e = 6
    A = kern.element_matrix(e)
    B = combine(
        local_div_block(e, space, coeffs),
        local_conv_block(e, space, coeffs),
        local_rem_block(e, space, coeffs),
    )
    assert np.max(np.abs(A - B)) < 1e-13 * np.max(np.abs(A))


def test_rem_block_structure(setup):
    _, coeffs, _, kern = setup
    A = kern.rem_block(3)
    # the Hessian part is real symmetric; the damping part is -i omega
    # times a real SPD mass matrix, so Re(A) is symmetric and
    # -Im(A)/omega is positive semidefinite on the volume block
    assert np.allclose(A.real, A.real.T)
    D = -A.imag / coeffs.omega
    nb2 = 2 * kern.nb
    lam = np.linalg.eigvalsh(D[:nb2, :nb2])
    assert lam.min() > -1e-12 * max(1.0, lam.max())
    assert np.max(np.abs(D[nb2:, :])) == 0.0


def test_element_rhs_oracle(setup, rng):
    mesh, coeffs, space, kern = setup
    x, y = sp.symbols("x y", real=True)
    f = vector_from_sympy((sp.sin(3 * x) * y, sp.cos(x + y)))
    e = 2
    rhs = kern.element_rhs(e, f)
    # oracle: <f, basis> by high-order quadrature
    vr = quad_triangle(16)
    tb = triangle_basis(space.k)
    V = tb.eval(vr.points)
    phys = space.map_to_physical(e, vr.points)
    w = vr.weights * space.detj[e]
    fv = f.value(phys)
    nb = kern.nb
    assert np.max(np.abs(rhs[:nb] - V @ (w * fv[:, 0]))) < 1e-10
    assert np.max(np.abs(rhs[nb:2 * nb] - V @ (w * fv[:, 1]))) < 1e-10
    assert np.max(np.abs(rhs[2 * nb:])) == 0.0


def test_conforming_function_has_zero_lifting(setup):
    """Interpolants of smooth fields have matching traces, so both
    liftings vanish and div_n/D_b reduce to the broken operators."""
    mesh, coeffs, space, kern = setup
    x, y = sp.symbols("x y", real=True)
    u = interpolate(vector_from_sympy((x**2 + y, x - y**2)), space)
    scale = np.max(np.abs(u.coefficients))
    for e in range(mesh.n_elements):
        U = u.coefficients[space.element_dofs(e)]
        lift = kern.lifting_map(e)
        slift = kern.scalar_lifting_map(e)
        assert np.max(np.abs(lift.lx @ U)) < 1e-12 * scale
        assert np.max(np.abs(lift.ly @ U)) < 1e-12 * scale
        assert np.max(np.abs(slift.ls @ U)) < 1e-12 * scale


def test_local_lifting_wrapper(setup):
    mesh, coeffs, space, kern = setup
    a = local_lifting(4, space, coeffs)
    b = kern.lifting_map(4)
    assert np.allclose(a.lx, b.lx)
    assert np.allclose(a.ly, b.ly)
