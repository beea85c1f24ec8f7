"""Parameter studies over the solver: convergence tables on nested meshes,
Mach-robustness against the energy-norm best approximation, the comparison
of lifting and penalty-only convection stabilization, and a stellar
background demo driven by a radial model CSV.

Every study emits rows with a fixed column schema so external plotting
tools can consume the CSVs directly. Output is reproducible: the same
configuration produces byte-identical files except for the runtime column.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import time
from dataclasses import dataclass, asdict
from typing import Optional

import numpy as np

from . import __version__
from .assembly import (
    assemble_condensed,
    cost_report,
    solve_condensed,
)
from .coeffs import (
    CoefficientSet,
    VectorField,
    calibrated_flow,
    manufactured_solution,
    preset,
    solar_coefficients,
    solar_load,
    strong_rhs,
    unit_disk_grid,
    unit_square_grid,
)
from .fespace import HdgSpace
from .forms import FormOptions
from .mesh import Mesh, generate_polygonal_disk, generate_square
from .postproc import best_approx, dn_error, eoc, raster_sample


class ConfigError(ValueError):
    """Invalid run configuration (bad field values or combinations)."""


_EXPERIMENTS = ("convergence", "mach", "sip", "solar")
_METHODS = ("full", "reduced")
_PRESETS = ("square-manufactured", "paper-disk", "solar")

CSV_COLUMNS = (
    "L", "order", "method", "lamb", "Mach", "wxerror",
    "ndofs", "ncdofs", "nze", "eoc", "runtime_s", "residual",
)


@dataclass(frozen=True)
class RunConfig:
    """Validated description of one study run."""

    experiment: str
    method: str = "full"
    k: int = 1
    alpha: float = 100.0
    conv_mode: str = "lifting"
    lam: float = 10.0
    levels: int = 4
    preset: str = "square-manufactured"
    mach: float = 0.0
    mach_schedule: tuple = ()
    lambda_factors: tuple = (1.0, 10.0, 100.0)
    solar_csv: Optional[str] = None
    out: Optional[str] = None
    quad_margin: int = 4
    seed: int = 0

    def validate(self) -> "RunConfig":
        if self.experiment not in _EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if self.method not in _METHODS:
            raise ConfigError(f"unknown method {self.method!r}")
        if not 1 <= self.k <= 6:
            raise ConfigError("polynomial degree k must be in 1..6")
        if self.method == "reduced" and self.k < 2:
            raise ConfigError("the reduced method needs k >= 2")
        if self.alpha <= 0 or self.lam <= 0:
            raise ConfigError("alpha and lambda must be positive")
        if self.conv_mode not in ("lifting", "sip"):
            raise ConfigError(f"unknown conv_mode {self.conv_mode!r}")
        if not 1 <= self.levels <= 8:
            raise ConfigError("levels must be in 1..8")
        if self.preset not in _PRESETS:
            raise ConfigError(f"unknown preset {self.preset!r}")
        if self.experiment == "solar" and self.solar_csv is None:
            raise ConfigError("experiment 'solar' needs solar_csv")
        if (self.experiment == "solar") != (self.preset == "solar"):
            raise ConfigError(
                "preset 'solar' and experiment 'solar' go together"
            )
        if self.experiment in ("mach", "sip", "solar"):
            for m in self.schedule():
                if not 0.0 < m <= 1.5:
                    raise ConfigError("Mach schedule must lie in (0, 1.5]")
        if self.mach < 0 or self.mach > 1.5:
            raise ConfigError("mach must lie in [0, 1.5]")
        if self.quad_margin < 0:
            raise ConfigError("quad_margin must be >= 0")
        return self

    def schedule(self) -> tuple:
        if self.mach_schedule:
            return tuple(float(m) for m in self.mach_schedule)
        if self.experiment == "mach":
            return (0.05, 0.25, 0.45)
        if self.experiment == "sip":
            return (self.mach if self.mach > 0 else 0.45,)
        if self.experiment == "solar":
            return (0.05, 0.5, 1.0, 1.5)
        return ()

    def config_hash(self) -> str:
        payload = asdict(self)
        payload.pop("out")
        digest = hashlib.sha256(
            json.dumps(payload, sort_keys=True).encode()
        )
        return digest.hexdigest()[:16]


@dataclass
class ResultRow:
    """One data point in the study output; columns match CSV_COLUMNS."""

    L: int
    order: int
    method: str
    lamb: Optional[float]
    Mach: float
    wxerror: float
    ndofs: int
    ncdofs: int
    nze: int
    eoc: Optional[float]
    runtime_s: float
    residual: float

    def as_record(self) -> list:
        return [
            str(self.L),
            str(self.order),
            self.method,
            "" if self.lamb is None else f"{self.lamb:.6g}",
            f"{self.Mach:.6g}",
            f"{self.wxerror:.12e}",
            str(self.ndofs),
            str(self.ncdofs),
            str(self.nze),
            "" if self.eoc is None else f"{self.eoc:.6f}",
            f"{self.runtime_s:.3f}",
            f"{self.residual:.6e}",
        ]


def write_csv(rows, config: RunConfig, path) -> None:
    """CSV with a metadata header (version, config hash, quadrature); the
    body is byte-stable for a fixed configuration up to runtime_s."""
    buf = io.StringIO()
    buf.write(f"# galbrunhdg {__version__}\n")
    buf.write(f"# config {config.config_hash()}\n")
    buf.write(f"# quad_margin {config.quad_margin}\n")
    buf.write("# solver splu/COLAMD\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow(row.as_record())
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())


# ---- problem construction ------------------------------------------------


def gaussian_source(center=(0.35, 0.35), width: float = 55.0) -> VectorField:
    """Localized volume force 0.5 sqrt(width/pi) exp(-width r^2) (1, 0)."""
    cx, cy = center
    amp = 0.5 * math.sqrt(width / math.pi)

    def value(pts):
        pts = np.atleast_2d(pts)
        g = amp * np.exp(
            -width * ((pts[:, 0] - cx) ** 2 + (pts[:, 1] - cy) ** 2)
        )
        out = np.zeros((len(pts), 2), dtype=complex)
        out[:, 0] = g
        return out

    return VectorField(value)


@dataclass
class Problem:
    coeffs: CoefficientSet
    u_ex: Optional[VectorField]
    f: VectorField
    domain: str


def _flow_for(base: CoefficientSet, mach: float):
    """Calibrated background flow for a preset at the given Mach number.

    Square domains use the stream-function flow (tangential at the
    boundary, mass conserving, nonvanishing b-coupling on all interior
    facets of the diagonal-split mesh); disk domains use the rigid
    rotation weighted by the sound speed."""
    meta = base.metadata or {}
    if meta.get("domain") == "square":
        kind = "stream"
        grid = unit_square_grid(60)
    else:
        kind = "c_s"
        grid = unit_disk_grid(60)
    flow, _ = calibrated_flow(base, kind, mach, grid)
    return flow


def build_problem(config: RunConfig, mach: float) -> Problem:
    if config.preset == "square-manufactured":
        base = preset("square-manufactured")
        cs = base.with_flow(_flow_for(base, mach)) if mach > 0 else base
        u_ex, _ = manufactured_solution("square-trig")
        return Problem(cs, u_ex, strong_rhs(u_ex, cs), "square")
    if config.preset == "paper-disk":
        base = preset("paper-disk")
        cs = base.with_flow(_flow_for(base, mach)) if mach > 0 else base
        u_ex, _ = manufactured_solution("paper-disk-refsol")
        return Problem(cs, u_ex, strong_rhs(u_ex, cs), "disk")
    if config.preset == "solar":
        base = solar_coefficients(solar_load(config.solar_csv))
        cs = base.with_flow(_flow_for(base, mach)) if mach > 0 else base
        return Problem(cs, None, gaussian_source(), "disk")
    raise ConfigError(f"unknown preset {config.preset!r}")


def study_mesh(domain: str, level: int, boundary_grading=None) -> Mesh:
    """Level-L mesh of the study domain: n = 4 * 2^L square grids, or the
    polygonal disk refined L + 1 times."""
    if domain == "square":
        return generate_square(4 * 2**level)
    return generate_polygonal_disk(level + 1, boundary_grading)


def _space(config: RunConfig, m: Mesh, cs: CoefficientSet) -> HdgSpace:
    if config.method == "reduced":
        return HdgSpace(
            m, config.k, k_facet=config.k - 1, l_lift=config.k - 1,
            flow=cs.b, flow_rho=cs.rho,
        )
    return HdgSpace(m, config.k, flow=cs.b, flow_rho=cs.rho)


def _options(config: RunConfig, lam: Optional[float] = None) -> FormOptions:
    return FormOptions(
        alpha=config.alpha,
        conv_mode=config.conv_mode if lam is None else "sip",
        lam=config.lam if lam is None else lam,
        quad_margin=config.quad_margin,
    )


def _solve_level(config, problem, level, options, grading=None):
    """One assemble + solve + error evaluation; returns the pieces a
    ResultRow needs."""
    t0 = time.perf_counter()
    m = study_mesh(problem.domain, level, grading)
    space = _space(config, m, problem.coeffs)
    system = assemble_condensed(space, problem.coeffs, options, problem.f)
    u_n, info = solve_condensed(system)
    err = (
        dn_error(problem.u_ex, u_n, problem.coeffs, options).total
        if problem.u_ex is not None
        else 0.0
    )
    ndofs, ncdofs, nze = cost_report(space, system)
    return u_n, space, err, ndofs, ncdofs, nze, info, time.perf_counter() - t0


# ---- studies -------------------------------------------------------------


def run_convergence(config: RunConfig) -> list:
    """Nested-mesh convergence table in the energy distance, one row per
    level, with per-level observed orders."""
    config.validate()
    problem = build_problem(config, config.mach)
    options = _options(config)
    rows, errs, hs = [], [], []
    for level in range(config.levels):
        _, space, err, nd, nc, nz, info, dt = _solve_level(
            config, problem, level, options
        )
        errs.append(err)
        hs.append(space.mesh.h_max)
        rows.append(ResultRow(
            L=level, order=config.k, method=config.method,
            lamb=config.lam if config.conv_mode == "sip" else None,
            Mach=config.mach, wxerror=err, ndofs=nd, ncdofs=nc, nze=nz,
            eoc=None, runtime_s=dt, residual=info.residual,
        ))
    if len(errs) >= 2:
        for row, rate in zip(rows, eoc(errs, hs)):
            row.eoc = rate
    if config.out:
        write_csv(rows, config, config.out)
    return rows


def run_mach(config: RunConfig) -> list:
    """Per-Mach discretization error next to the energy-norm best
    approximation of the exact solution on the same space; the ratio of
    the two rows measures how far the solver sits from quasi-optimality."""
    config.validate()
    options = _options(config)
    rows = []
    for mach in config.schedule():
        problem = build_problem(config, mach)
        errs, hs, pend = [], [], []
        for level in range(config.levels):
            u_n, space, err, nd, nc, nz, info, dt = _solve_level(
                config, problem, level, options
            )
            t0 = time.perf_counter()
            proj = best_approx(problem.u_ex, space, problem.coeffs, options)
            perr = dn_error(problem.u_ex, proj, problem.coeffs, options).total
            errs.append(err)
            hs.append(space.mesh.h_max)
            rows.append(ResultRow(
                L=level, order=config.k, method=config.method, lamb=None,
                Mach=mach, wxerror=err, ndofs=nd, ncdofs=nc, nze=nz,
                eoc=None, runtime_s=dt, residual=info.residual,
            ))
            pend.append((len(rows) - 1, ResultRow(
                L=level, order=config.k, method="proj", lamb=None,
                Mach=mach, wxerror=perr, ndofs=nd, ncdofs=nc, nze=nz,
                eoc=None, runtime_s=time.perf_counter() - t0, residual=0.0,
            )))
        if len(errs) >= 2:
            rates = eoc(errs, hs)
            for (idx, _), rate in zip(pend, rates):
                rows[idx].eoc = rate
        for off, (idx, prow) in enumerate(pend):
            rows.insert(idx + 1 + off, prow)
    if config.out:
        write_csv(rows, config, config.out)
    return rows


def run_sip_compare(config: RunConfig) -> list:
    """Lifting-stabilized convection against the penalty-only variant for
    a ladder of penalty parameters lambda * k^2, at one Mach number."""
    config.validate()
    (mach,) = config.schedule()
    problem = build_problem(config, mach)
    rows = []
    for level in range(config.levels):
        _, _, err, nd, nc, nz, info, dt = _solve_level(
            config, problem, level, _options(config)
        )
        rows.append(ResultRow(
            L=level, order=config.k, method="lifting", lamb=None, Mach=mach,
            wxerror=err, ndofs=nd, ncdofs=nc, nze=nz, eoc=None,
            runtime_s=dt, residual=info.residual,
        ))
        for lam in config.lambda_factors:
            _, _, err, nd, nc, nz, info, dt = _solve_level(
                config, problem, level, _options(config, lam=lam)
            )
            rows.append(ResultRow(
                L=level, order=config.k, method="sip", lamb=lam, Mach=mach,
                wxerror=err, ndofs=nd, ncdofs=nc, nze=nz, eoc=None,
                runtime_s=dt, residual=info.residual,
            ))
    if config.out:
        write_csv(rows, config, config.out)
    return rows


def run_solar(config: RunConfig) -> list:
    """Robustness demo on stellar radial profiles: solve on the
    boundary-graded polygonal disk for each Mach number and dump the real
    part of the first solution component on a raster grid next to the CSV
    (no exact solution exists; validation is by solver residual)."""
    config.validate()
    options = _options(config)
    rows = []
    xs = np.linspace(-1.0, 1.0, 101)
    for i, mach in enumerate(config.schedule()):
        problem = build_problem(config, mach)
        u_n, space, _, nd, nc, nz, info, dt = _solve_level(
            config, problem, config.levels - 1, options, grading=1.5
        )
        rows.append(ResultRow(
            L=config.levels - 1, order=config.k, method=config.method,
            lamb=None, Mach=mach, wxerror=0.0, ndofs=nd, ncdofs=nc, nze=nz,
            eoc=None, runtime_s=dt, residual=info.residual,
        ))
        if config.out:
            field = raster_sample(u_n, xs, xs)
            dump = f"{config.out}.mach{i}.npy"
            np.save(dump, field[:, :, 0].real)
    if config.out:
        write_csv(rows, config, config.out)
    return rows


STUDIES = {
    "convergence": run_convergence,
    "mach": run_mach,
    "sip": run_sip_compare,
    "solar": run_solar,
}


def run(config: RunConfig) -> list:
    return STUDIES[config.validate().experiment](config)
