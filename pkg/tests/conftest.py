import numpy as np
import pytest

from galbrunhdg.coeffs import (
    calibrated_flow,
    manufactured_solution,
    preset,
    strong_rhs,
    unit_square_grid,
)
from galbrunhdg.fespace import HdgSpace
from galbrunhdg.mesh import generate_square


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture(scope="session")
def square_mesh():
    return generate_square(4)


@pytest.fixture(scope="session")
def square_coeffs():
    """Square preset with a calibrated stream flow at Mach 0.25."""
    base = preset("square-manufactured")
    flow, _ = calibrated_flow(base, "stream", 0.25, unit_square_grid(40))
    return base.with_flow(flow)


@pytest.fixture(scope="session")
def square_space(square_mesh, square_coeffs):
    return HdgSpace(square_mesh, 2, flow=square_coeffs.b,
                    flow_rho=square_coeffs.rho)


@pytest.fixture(scope="session")
def square_problem(square_coeffs):
    u_ex, _ = manufactured_solution("square-trig")
    return u_ex, strong_rhs(u_ex, square_coeffs)


def random_function(space, rng):
    from galbrunhdg.fespace import DiscreteFunction

    c = rng.standard_normal(space.total_dofs)
    c = c + 1j * rng.standard_normal(space.total_dofs)
    return DiscreteFunction(space, c)
