import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from isodarboux.grid import SampledFunction, build_grid, sample
from isodarboux.schrodinger import WaveFunction, compute_zero_mode, wave_function

settings.register_profile(
    "repo", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("repo")


def gaussian_zero_mode(grid):
    """Closed-form oscillator ground state, zero energy convention (V = x^2 - 1)."""
    return wave_function(sample(grid, lambda x: np.exp(-0.5 * x * x)), 0.0)


@pytest.fixture(scope="session")
def osc_grid():
    return build_grid(-10.0, 10.0, 2001)


@pytest.fixture(scope="session")
def osc(osc_grid):
    """Shifted oscillator ``x^2 - 1`` and its analytic zero mode."""
    V = sample(osc_grid, lambda x: x * x - 1.0)
    return V, gaussian_zero_mode(osc_grid)


@pytest.fixture(scope="session")
def pt_grid():
    return build_grid(-15.0, 15.0, 3001)


@pytest.fixture(scope="session")
def pt(pt_grid):
    """Physical Poschl-Teller ``-2 sech^2 x`` and its discrete ground state."""
    V = sample(pt_grid, lambda x: -2.0 / np.cosh(x) ** 2)
    return V, compute_zero_mode(V)


@pytest.fixture(scope="session")
def pt_shifted(pt_grid):
    """``1 - 2 sech^2 x`` with the analytic zero mode ``sech x``."""
    V = sample(pt_grid, lambda x: 1.0 - 2.0 / np.cosh(x) ** 2)
    return V, wave_function(sample(pt_grid, lambda x: 1.0 / np.cosh(x)), 0.0)
