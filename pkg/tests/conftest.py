import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from alphamod.grid import make_grid

settings.register_profile(
    "suite",
    deadline=None,
    max_examples=25,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def g256():
    return make_grid(1, 256, 4 * math.pi)


@pytest.fixture(scope="session")
def g1024():
    return make_grid(1, 1024, 8 * math.pi)


@pytest.fixture(scope="session")
def g2d():
    return make_grid(2, 64, 4 * math.pi)


@pytest.fixture()
def rng():
    return np.random.default_rng(20260814)


def random_field(grid, rng, decay: float = 2.0):
    """Band-limited random field with polynomially decaying spectrum."""
    from alphamod.grid import SpectralField, to_physical

    coeffs = rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape)
    rho2 = np.zeros(grid.shape)
    for axis_vals in grid.xi_mesh():
        rho2 = rho2 + axis_vals**2
    coeffs = coeffs / (1.0 + rho2) ** (decay / 2.0)
    return to_physical(SpectralField(grid, coeffs))
