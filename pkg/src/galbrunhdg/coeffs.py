"""Coefficient fields for the damped time-harmonic Galbrun equation.

Scalar and vector fields carry exact derivatives (generated symbolically or
by chain rules), so manufactured right-hand sides are accurate to machine
precision. Finite differences are used only as a test oracle.

Point convention: fields are evaluated on arrays of shape (n, 2) and return
(n,), (n, 2), (n, 2, 2) or (n, 2, 2, 2) arrays.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np
import sympy as sp
from scipy.interpolate import PchipInterpolator

_X, _Y = sp.symbols("x y", real=True)


def _lambdify(expr):
    f = sp.lambdify((_X, _Y), expr, modules="numpy")

    def wrapped(x, y):
        out = f(x, y)
        return np.broadcast_to(np.asarray(out), np.shape(x)).astype(
            complex if np.iscomplexobj(out) or _is_complex_expr(expr) else float
        )

    return wrapped


def _is_complex_expr(expr) -> bool:
    return sp.I in sp.sympify(expr).atoms(sp.I)


@dataclass(frozen=True)
class ScalarField:
    """Real scalar field with exact gradient and Hessian callables."""

    value: Callable[[np.ndarray], np.ndarray]
    gradient: Callable[[np.ndarray], np.ndarray]
    hessian: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def hess(self, pts) -> np.ndarray:
        if self.hessian is None:
            raise ValueError("field has no Hessian")
        return self.hessian(pts)


@dataclass(frozen=True)
class VectorField:
    """Complex 2D vector field; ``second`` holds component Hessians with
    index order [point, component, d1, d2]."""

    value: Callable[[np.ndarray], np.ndarray]
    jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None
    second: Optional[Callable[[np.ndarray], np.ndarray]] = None


def scalar_from_sympy(expr) -> ScalarField:
    """Scalar field with symbolically exact gradient and Hessian."""
    expr = sp.sympify(expr)
    fx = sp.diff(expr, _X)
    fy = sp.diff(expr, _Y)
    fv = _lambdify(expr)
    fgx = _lambdify(fx)
    fgy = _lambdify(fy)
    fxx = _lambdify(sp.diff(fx, _X))
    fxy = _lambdify(sp.diff(fx, _Y))
    fyy = _lambdify(sp.diff(fy, _Y))

    def value(pts):
        pts = np.atleast_2d(pts)
        return fv(pts[:, 0], pts[:, 1])

    def gradient(pts):
        pts = np.atleast_2d(pts)
        x, y = pts[:, 0], pts[:, 1]
        return np.stack([fgx(x, y), fgy(x, y)], axis=-1)

    def hessian(pts):
        pts = np.atleast_2d(pts)
        x, y = pts[:, 0], pts[:, 1]
        hxx = fxx(x, y)
        hxy = fxy(x, y)
        hyy = fyy(x, y)
        h = np.empty(hxx.shape + (2, 2), dtype=hxx.dtype)
        h[..., 0, 0] = hxx
        h[..., 0, 1] = hxy
        h[..., 1, 0] = hxy
        h[..., 1, 1] = hyy
        return h

    return ScalarField(value, gradient, hessian)


def vector_from_sympy(exprs) -> VectorField:
    """Vector field (possibly complex) with exact Jacobian and second
    derivatives from a pair of sympy expressions."""
    e1, e2 = (sp.sympify(e) for e in exprs)
    comps = (e1, e2)
    fval = [_lambdify(e) for e in comps]
    fjac = [[_lambdify(sp.diff(e, v)) for v in (_X, _Y)] for e in comps]
    fsec = [
        [[_lambdify(sp.diff(e, v1, v2)) for v2 in (_X, _Y)] for v1 in (_X, _Y)]
        for e in comps
    ]

    def value(pts):
        pts = np.atleast_2d(pts)
        x, y = pts[:, 0], pts[:, 1]
        return np.stack([fval[0](x, y), fval[1](x, y)], axis=-1)

    def jacobian(pts):
        pts = np.atleast_2d(pts)
        x, y = pts[:, 0], pts[:, 1]
        rows = [[fjac[i][j](x, y) for j in range(2)] for i in range(2)]
        out = np.empty((len(x), 2, 2), dtype=rows[0][0].dtype)
        for i in range(2):
            for j in range(2):
                out[:, i, j] = rows[i][j]
        return out

    def second(pts):
        pts = np.atleast_2d(pts)
        x, y = pts[:, 0], pts[:, 1]
        first = fsec[0][0][0](x, y)
        out = np.empty((len(x), 2, 2, 2), dtype=first.dtype)
        for i in range(2):
            for j in range(2):
                for m in range(2):
                    out[:, i, j, m] = fsec[i][j][m](x, y)
        return out

    return VectorField(value, jacobian, second)


def constant_scalar(c: float) -> ScalarField:
    c = float(c)

    def value(pts):
        return np.full(len(np.atleast_2d(pts)), c)

    def gradient(pts):
        return np.zeros((len(np.atleast_2d(pts)), 2))

    def hessian(pts):
        return np.zeros((len(np.atleast_2d(pts)), 2, 2))

    return ScalarField(value, gradient, hessian)


def zero_flow() -> VectorField:
    def value(pts):
        return np.zeros((len(np.atleast_2d(pts)), 2))

    def jacobian(pts):
        return np.zeros((len(np.atleast_2d(pts)), 2, 2))

    return VectorField(value, jacobian)


@dataclass(frozen=True)
class CoefficientSet:
    """All coefficients of the equation: density rho, squared sound speed
    cs2, pressure p, gravitational potential phi, damping gamma, background
    flow b, frequency omega and frame angular speed rot (acting as
    rot x u := rot * (-u2, u1))."""

    rho: ScalarField
    cs2: ScalarField
    p: ScalarField
    phi: ScalarField
    gamma: ScalarField
    b: VectorField
    omega: float
    rot: float = 0.0
    metadata: Optional[dict] = None

    def cs_value(self, pts) -> np.ndarray:
        return np.sqrt(self.cs2.value(pts))

    def with_flow(self, b: VectorField) -> "CoefficientSet":
        return replace(self, b=b)


# ---- field algebra used by flow profiles (value + gradient only) --------


def _field_one() -> ScalarField:
    return constant_scalar(1.0)


def _field_sqrt(f: ScalarField) -> ScalarField:
    def value(pts):
        return np.sqrt(f.value(pts))

    def gradient(pts):
        return f.gradient(pts) / (2.0 * np.sqrt(f.value(pts))[:, None])

    return ScalarField(value, gradient)


def _field_quot(f: ScalarField, g: ScalarField) -> ScalarField:
    def value(pts):
        return f.value(pts) / g.value(pts)

    def gradient(pts):
        fv = f.value(pts)[:, None]
        gv = g.value(pts)[:, None]
        return (f.gradient(pts) * gv - fv * g.gradient(pts)) / (gv * gv)

    return ScalarField(value, gradient)


def _field_mul(f: ScalarField, g: ScalarField) -> ScalarField:
    def value(pts):
        return f.value(pts) * g.value(pts)

    def gradient(pts):
        return (
            f.gradient(pts) * g.value(pts)[:, None]
            + f.value(pts)[:, None] * g.gradient(pts)
        )

    return ScalarField(value, gradient)


def radial_bump(center, radius: float) -> ScalarField:
    """C^7 bump (1 - (r/R)^2)^8 supported on the disk of given radius."""
    cx, cy = center
    r2inv = 1.0 / radius**2

    def _s(pts):
        pts = np.atleast_2d(pts)
        dx = pts[:, 0] - cx
        dy = pts[:, 1] - cy
        return dx * dx + dy * dy, dx, dy

    def value(pts):
        s, _, _ = _s(pts)
        t = np.maximum(0.0, 1.0 - s * r2inv)
        return t**8

    def gradient(pts):
        s, dx, dy = _s(pts)
        t = np.maximum(0.0, 1.0 - s * r2inv)
        c = -16.0 * r2inv * t**7
        return np.stack([c * dx, c * dy], axis=-1)

    return ScalarField(value, gradient)


def background_flow(
    kind: str,
    c_b: float,
    coeffs: Optional[CoefficientSet] = None,
    center=(0.0, 0.0),
    bump_radius: Optional[float] = None,
) -> VectorField:
    """Mass-conserving background flows.

    Kinds 1, c_s and c_s/rho are rigid-rotation profiles
    b = eta * c_b * (-(y-cy), x-cx); for radial eta and rho about the same
    center, div(rho b) = 0 holds pointwise. Kind bump confines the
    rotation to a disk of ``bump_radius``. Kind stream is a stream-function
    flow b = (c_b / rho) curl(sin(pi x) sin(pi y)) for the unit square:
    div(rho b) = 0 and b . nu = 0 on the boundary hold exactly, and b does
    not vanish identically on any interior facet of a diagonal-split
    square mesh. Prefer it over bump there: facet unknowns couple only
    through b-weighted jump terms, so facets where b vanishes identically
    would carry skeleton unknowns that no equation sees."""
    if c_b < 0:
        raise ValueError("c_b must be >= 0")
    if kind == "stream":
        return _stream_flow(c_b, _require(coeffs, kind).rho)
    if kind == "1":
        eta = _field_one()
    elif kind == "c_s":
        eta = _field_sqrt(_require(coeffs, kind).cs2)
    elif kind == "c_s/rho":
        eta = _field_quot(_field_sqrt(_require(coeffs, kind).cs2), coeffs.rho)
    elif kind == "bump":
        if bump_radius is None:
            raise ValueError("kind 'bump' needs bump_radius")
        eta = radial_bump(center, bump_radius)
        bump_radius = None
    else:
        raise ValueError(f"unknown flow kind {kind!r}")
    if bump_radius is not None:
        eta = _field_mul(eta, radial_bump(center, bump_radius))
    cx, cy = center

    def value(pts):
        pts = np.atleast_2d(pts)
        t = np.stack([-(pts[:, 1] - cy), pts[:, 0] - cx], axis=-1)
        return c_b * eta.value(pts)[:, None] * t

    def jacobian(pts):
        pts = np.atleast_2d(pts)
        t = np.stack([-(pts[:, 1] - cy), pts[:, 0] - cx], axis=-1)
        e = eta.value(pts)
        ge = eta.gradient(pts)
        out = np.empty((len(pts), 2, 2))
        out[:, 0, 0] = t[:, 0] * ge[:, 0]
        out[:, 0, 1] = t[:, 0] * ge[:, 1] - e
        out[:, 1, 0] = t[:, 1] * ge[:, 0] + e
        out[:, 1, 1] = t[:, 1] * ge[:, 1]
        return c_b * out

    return VectorField(value, jacobian)


def _stream_flow(c_b: float, rho: ScalarField) -> VectorField:
    pi = np.pi

    def _curl(pts):
        x, y = pts[:, 0], pts[:, 1]
        v = np.stack(
            [pi * np.sin(pi * x) * np.cos(pi * y),
             -pi * np.cos(pi * x) * np.sin(pi * y)],
            axis=-1,
        )
        cc = pi * pi * np.cos(pi * x) * np.cos(pi * y)
        ss = pi * pi * np.sin(pi * x) * np.sin(pi * y)
        jv = np.empty((len(x), 2, 2))
        jv[:, 0, 0] = cc
        jv[:, 0, 1] = -ss
        jv[:, 1, 0] = ss
        jv[:, 1, 1] = -cc
        return v, jv

    def value(pts):
        pts = np.atleast_2d(pts)
        v, _ = _curl(pts)
        return c_b * v / rho.value(pts)[:, None]

    def jacobian(pts):
        pts = np.atleast_2d(pts)
        v, jv = _curl(pts)
        r = rho.value(pts)
        gr = rho.gradient(pts)
        out = jv / r[:, None, None]
        out -= v[:, :, None] * gr[:, None, :] / (r * r)[:, None, None]
        return c_b * out

    return VectorField(value, jacobian)


def _require(coeffs, kind):
    if coeffs is None:
        raise ValueError(f"flow kind {kind!r} needs a coefficient set")
    return coeffs


# ---- presets -------------------------------------------------------------

_DISK_RHO = sp.sqrt(sp.Rational(10) / sp.pi) * sp.exp(-10 * (_X**2 + _Y**2))
_SQ_R2 = (_X - sp.Rational(1, 2)) ** 2 + (_Y - sp.Rational(1, 2)) ** 2
# Mild density contrast on the square: a near-singular rho (as on the
# disk) would force a tiny calibrated flow and leave the b-weighted facet
# coupling too weak on coarse meshes.
_SQ_RHO = 1 + sp.Rational(3, 5) * sp.exp(-2 * _SQ_R2)


def preset(name: str, solar_csv=None) -> CoefficientSet:
    """Named coefficient sets.

    paper-disk: Gaussian density on the unit disk, omega = 0.78 * 2 pi,
    gamma = 0.1, no rotation. square-manufactured: analogous radial
    profiles with a mild density contrast, centered at (1/2, 1/2) on the
    unit square. solar: radial profiles from a model CSV (see
    solar_load)."""
    if name == "paper-disk":
        rho = _DISK_RHO
        cs2 = sp.Rational(144, 100) + sp.Rational(1, 4) * rho
        p = sp.Rational(144, 100) * rho + sp.Rational(8, 100) * rho**2
        return CoefficientSet(
            rho=scalar_from_sympy(rho),
            cs2=scalar_from_sympy(cs2),
            p=scalar_from_sympy(p),
            phi=constant_scalar(0.0),
            gamma=constant_scalar(0.1),
            b=zero_flow(),
            omega=0.78 * 2.0 * math.pi,
            rot=0.0,
            metadata={"preset": "paper-disk", "domain": "disk", "center": (0.0, 0.0)},
        )
    if name == "square-manufactured":
        rho = _SQ_RHO
        cs2 = sp.Rational(144, 100) + sp.Rational(1, 4) * rho
        p = sp.Rational(144, 100) * rho + sp.Rational(8, 100) * rho**2
        return CoefficientSet(
            rho=scalar_from_sympy(rho),
            cs2=scalar_from_sympy(cs2),
            p=scalar_from_sympy(p),
            phi=constant_scalar(0.0),
            gamma=constant_scalar(0.1),
            b=zero_flow(),
            omega=0.78 * 2.0 * math.pi,
            rot=0.0,
            metadata={
                "preset": "square-manufactured",
                "domain": "square",
                "center": (0.5, 0.5),
                "flow_kind": "stream",
            },
        )
    if name == "solar":
        if solar_csv is None:
            raise ValueError("preset 'solar' needs solar_csv=<path>")
        return solar_coefficients(solar_load(solar_csv))
    raise ValueError(f"unknown preset {name!r}")


# ---- diagnostics ---------------------------------------------------------


def unit_square_grid(n: int = 40) -> np.ndarray:
    t = np.linspace(0.0, 1.0, n)
    xv, yv = np.meshgrid(t, t, indexing="xy")
    return np.column_stack([xv.ravel(), yv.ravel()])


def unit_disk_grid(n: int = 40) -> np.ndarray:
    pts = 2.0 * unit_square_grid(n) - 1.0
    return pts[np.hypot(pts[:, 0], pts[:, 1]) <= 1.0]


def mach_number(set_: CoefficientSet, sample_grid) -> float:
    """max over the grid of |b| / c_s."""
    pts = np.atleast_2d(sample_grid)
    if len(pts) == 0:
        raise ValueError("empty sample grid")
    bv = set_.b.value(pts)
    return float(np.max(np.hypot(bv[:, 0], bv[:, 1]) / set_.cs_value(pts)))


def calibrated_flow(
    set_: CoefficientSet, kind: str, target_mach: float, sample_grid
) -> tuple[VectorField, float]:
    """Flow of the given profile scaled so that mach_number hits the
    target on the sample grid. Returns (flow, c_b)."""
    meta = set_.metadata or {}
    center = meta.get("center", (0.0, 0.0))
    bump = meta.get("flow_bump_radius")
    if kind == "bump" and bump is None:
        bump = 0.45
    unit = background_flow(kind, 1.0, set_, center=center, bump_radius=bump)
    base = mach_number(set_.with_flow(unit), sample_grid)
    if base <= 0:
        raise ValueError("flow profile vanishes on the sample grid")
    c_b = target_mach / base
    return (
        background_flow(kind, c_b, set_, center=center, bump_radius=bump),
        c_b,
    )


@dataclass(frozen=True)
class ThetaReport:
    c_m: float
    theta: float
    sup_ratio: float  # sampled sup of lambda_-(m) / gamma, may be negative


def theta_diagnostic(set_: CoefficientSet, sample_grid) -> ThetaReport:
    """Damping-vs-potential angle theta = arctan(C_m / |omega|) with
    C_m = max{0, sup lambda_-(m) / gamma}, m = -Hess(p)/rho + Hess(phi)."""
    pts = np.atleast_2d(sample_grid)
    g = set_.gamma.value(pts)
    if np.any(g <= 0):
        raise ValueError("theta diagnostic needs gamma > 0 on the grid")
    m = (
        -set_.p.hess(pts) / set_.rho.value(pts)[:, None, None]
        + set_.phi.hess(pts)
    )
    from .solver import sym2_eigs_batch

    lam_minus, _ = sym2_eigs_batch(m)
    sup_ratio = float(np.max(lam_minus / g))
    c_m = max(0.0, sup_ratio)
    return ThetaReport(
        c_m=c_m, theta=math.atan2(c_m, abs(set_.omega)), sup_ratio=sup_ratio
    )


@dataclass(frozen=True)
class MachBoundReport:
    mach_sq: float
    threshold: float
    satisfied: bool
    theta: float
    c_const: float


def mach_bound_report(
    set_: CoefficientSet, C_const: float, sample_grid
) -> MachBoundReport:
    """Checks the flow-boundedness condition
    ||c_s^-1 b||_inf^2 < 1 / (C_const * (1 + tan^2 theta))."""
    rep = theta_diagnostic(set_, sample_grid)
    mach = mach_number(set_, sample_grid)
    threshold = 1.0 / (C_const * (1.0 + math.tan(rep.theta) ** 2))
    return MachBoundReport(
        mach_sq=mach**2,
        threshold=threshold,
        satisfied=mach**2 < threshold,
        theta=rep.theta,
        c_const=C_const,
    )


# ---- manufactured solutions ---------------------------------------------


def manufactured_solution(name: str) -> tuple[VectorField, dict]:
    """Exact solutions with full second derivatives for right-hand-side
    generation and error measurement. The square variants satisfy
    nu . u = 0 on the boundary of the unit square exactly."""
    if name == "paper-disk-refsol":
        s = _X**2 + _Y**2
        alpha = sp.log(10**9)
        g = sp.sqrt(alpha / sp.pi) * sp.exp(-alpha * s)
        base = sp.sin(s) * sp.sin(s - 1) / _DISK_RHO
        u1 = base * (1 + sp.I) * g
        u2 = -base * (1 + sp.I) * g
        return vector_from_sympy((u1, u2)), {"domain": "disk"}
    if name == "square-poly":
        w = _X * (1 - _X) * _Y * (1 - _Y)
        return (
            vector_from_sympy(((1 + sp.I) * w, -(1 + sp.I) * w)),
            {"domain": "square"},
        )
    if name == "square-trig":
        u1 = (1 + sp.I) * sp.sin(sp.pi * _X) * sp.cos(sp.pi * _Y)
        u2 = (1 - sp.I / 2) * sp.cos(sp.pi * _X) * sp.sin(sp.pi * _Y)
        return vector_from_sympy((u1, u2)), {"domain": "square"}
    raise ValueError(f"unknown manufactured solution {name!r}")


def strong_rhs(u_ex: VectorField, set_: CoefficientSet) -> VectorField:
    """Pointwise application of the full strong operator to u_ex:

    f = -rho (omega + i d_b + i rot x)^2 u - grad(rho c_s^2 div u)
        + (div u) grad p - grad(grad p . u)
        + (Hess p - rho Hess phi) u - i omega gamma rho u.
    """
    if u_ex.jacobian is None or u_ex.second is None:
        raise ValueError("strong_rhs needs first and second derivatives")

    def value(pts):
        pts = np.atleast_2d(pts)
        u = u_ex.value(pts).astype(complex)
        ju = u_ex.jacobian(pts).astype(complex)
        hu = u_ex.second(pts).astype(complex)

        r = set_.rho.value(pts)
        gr = set_.rho.gradient(pts)
        c2 = set_.cs2.value(pts)
        gc2 = set_.cs2.gradient(pts)
        gp = set_.p.gradient(pts)
        hp = set_.p.hess(pts)
        hphi = set_.phi.hess(pts)
        gam = set_.gamma.value(pts)
        bv = set_.b.value(pts)
        jb = set_.b.jacobian(pts)
        w = set_.omega
        rot = set_.rot

        def perp(v):
            return np.stack([-v[..., 1], v[..., 0]], axis=-1)

        # A = (omega + i d_b + i rot x) u and its Jacobian by product rule.
        a = w * u + 1j * np.einsum("nij,nj->ni", ju, bv) + 1j * rot * perp(u)
        ja = (
            w * ju
            + 1j * (np.einsum("nikj,nk->nij", hu, bv) + np.einsum("nik,nkj->nij", ju, jb))
            + 1j * rot * np.stack([-ju[:, 1, :], ju[:, 0, :]], axis=1)
        )
        conv2 = w * a + 1j * np.einsum("nij,nj->ni", ja, bv) + 1j * rot * perp(a)

        divu = ju[:, 0, 0] + ju[:, 1, 1]
        grad_div = hu[:, 0, 0, :] + hu[:, 1, 1, :]
        grad_rc2 = gr * c2[:, None] + r[:, None] * gc2

        f = -r[:, None] * conv2
        f -= grad_rc2 * divu[:, None] + (r * c2)[:, None] * grad_div
        f += divu[:, None] * gp
        f -= np.einsum("nij,nj->ni", hp.astype(complex), u)
        f -= np.einsum("nij,ni->nj", ju, gp.astype(complex))
        f += np.einsum(
            "nij,nj->ni", (hp - r[:, None, None] * hphi).astype(complex), u
        )
        f -= 1j * w * (gam * r)[:, None] * u
        return f

    return VectorField(value)


# ---- solar model ---------------------------------------------------------


@dataclass(frozen=True)
class SolarModel:
    """Radial profiles loaded from a model CSV, with shape-preserving
    (monotone cubic) interpolants over the normalized radius in [0, 1]."""

    radius: np.ndarray  # normalized to [0, 1]
    soundspeed: np.ndarray
    density: np.ndarray
    pressure: Optional[np.ndarray]
    r_scale: float  # original radius extent (the solar radius)
    cs_interp: PchipInterpolator
    rho_interp: PchipInterpolator
    p_interp: Optional[PchipInterpolator]


class SolarDataError(ValueError):
    pass


def solar_load(path) -> SolarModel:
    """Reads a CSV with header columns radius, soundspeed, density and
    optionally pressure. Radii must be strictly increasing and soundspeed,
    density positive."""
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise SolarDataError("empty CSV")
        cols = [c.strip() for c in reader.fieldnames]
        for need in ("radius", "soundspeed", "density"):
            if need not in cols:
                raise SolarDataError(f"missing CSV column {need!r}")
        has_p = "pressure" in cols
        for i, row in enumerate(reader, start=2):
            try:
                rec = [
                    float(row["radius"]),
                    float(row["soundspeed"]),
                    float(row["density"]),
                ]
                if has_p:
                    rec.append(float(row["pressure"]))
            except (TypeError, ValueError, KeyError) as exc:
                raise SolarDataError(f"malformed CSV row {i}: {row}") from exc
            rows.append(rec)
    if len(rows) < 4:
        raise SolarDataError("need at least 4 data rows")
    data = np.array(rows)
    radius = data[:, 0]
    if np.any(np.diff(radius) <= 0):
        raise SolarDataError("radii must be strictly increasing")
    cs = data[:, 1]
    rho = data[:, 2]
    if np.any(cs <= 0) or np.any(rho <= 0):
        raise SolarDataError("soundspeed and density must be positive")
    press = data[:, 3] if data.shape[1] > 3 else None
    r_scale = float(radius[-1])
    rn = radius / r_scale
    return SolarModel(
        radius=rn,
        soundspeed=cs,
        density=rho,
        pressure=press,
        r_scale=r_scale,
        cs_interp=PchipInterpolator(rn, cs),
        rho_interp=PchipInterpolator(rn, rho),
        p_interp=PchipInterpolator(rn, press) if press is not None else None,
    )


def _radial_scalar(interp: PchipInterpolator) -> ScalarField:
    d1 = interp.derivative()
    d2 = interp.derivative(2)

    def _r(pts):
        pts = np.atleast_2d(pts)
        return np.hypot(pts[:, 0], pts[:, 1]), pts

    def value(pts):
        r, _ = _r(pts)
        return interp(r)

    def gradient(pts):
        r, p = _r(pts)
        safe = np.where(r > 1e-14, r, 1.0)
        fac = np.where(r > 1e-14, d1(r) / safe, 0.0)
        return fac[:, None] * p

    def hessian(pts):
        r, p = _r(pts)
        safe = np.where(r > 1e-14, r, 1.0)
        rhat = p / safe[:, None]
        f1 = d1(r)
        f2 = d2(r)
        eye = np.eye(2)
        rr = rhat[:, :, None] * rhat[:, None, :]
        # radial Hessian: f'' rhat rhat^T + (f'/r)(I - rhat rhat^T)
        h = f2[:, None, None] * rr + (f1 / safe)[:, None, None] * (eye - rr)
        h[r <= 1e-14] = f2[r <= 1e-14, None, None] * eye
        return h

    return ScalarField(value, gradient, hessian)


def solar_coefficients(model: SolarModel) -> CoefficientSet:
    """Coefficient set on the unit disk from solar radial profiles.

    The radius is normalized by the model extent; density, sound speed and
    pressure stay in source units. omega = 0.003 * 2 pi * R with R the
    model radius extent, gamma = omega / 100, no frame rotation."""
    omega = 0.003 * 2.0 * math.pi * model.r_scale
    cs_field = _radial_scalar(model.cs_interp)

    cs2 = ScalarField(
        value=lambda pts: cs_field.value(pts) ** 2,
        gradient=lambda pts: 2.0
        * cs_field.value(pts)[:, None]
        * cs_field.gradient(pts),
    )
    p_field = (
        _radial_scalar(model.p_interp)
        if model.p_interp is not None
        else constant_scalar(0.0)
    )
    return CoefficientSet(
        rho=_radial_scalar(model.rho_interp),
        cs2=cs2,
        p=p_field,
        phi=constant_scalar(0.0),
        gamma=constant_scalar(omega / 100.0),
        b=zero_flow(),
        omega=omega,
        rot=0.0,
        metadata={
            "preset": "solar",
            "domain": "disk",
            "center": (0.0, 0.0),
            "radius_normalized_by": model.r_scale,
            "units": "source units for rho, c_s, p; radius in [0, 1]",
        },
    )
