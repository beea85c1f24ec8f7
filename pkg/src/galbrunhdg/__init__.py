"""Lifting-stabilized hybrid discontinuous Galerkin solver for the damped
time-harmonic Galbrun equation in 2D, with static condensation and an
experiment harness for convergence, Mach-robustness and stabilization
comparisons."""

__version__ = "0.1.0"

from . import mesh, refelem, fespace, coeffs, forms, assembly, solver, postproc

__all__ = [
    "mesh",
    "refelem",
    "fespace",
    "coeffs",
    "forms",
    "assembly",
    "solver",
    "postproc",
    "experiments",
    "cli",
]
