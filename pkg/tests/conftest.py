import numpy as np
import pytest
from hypothesis import settings

from nschsim.grid import Grid
from nschsim.potential import PotentialSpec
from nschsim.stepper import SolverConfig, State

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


def cosine_state(grid: Grid, mu_amp: float = 0.5, rho_amp: float = 0.1,
                 mu0: float = 1.0, rho0: float = 0.5) -> State:
    c = np.ones(grid.shape)
    for x, L in zip(grid.coords(), grid.lengths):
        c = c * np.cos(np.pi * x / L)
    return State(0.0, mu0 + mu_amp * c, rho0 + rho_amp * c)


@pytest.fixture
def grid1d():
    return Grid((64,), (1.0,))


@pytest.fixture
def grid2d():
    return Grid((12, 10), (1.0, 0.8))


@pytest.fixture
def spec():
    return PotentialSpec(theta=1.0, theta_c=3.0)


@pytest.fixture
def cfg():
    return SolverConfig()
