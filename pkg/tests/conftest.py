import numpy as np
import pytest

from rothe1d import (
    DEFAULT_MODEL,
    ModelConfig,
    PulseConfig,
    UniformGrid,
    fit_lcg,
    ground_state,
)

#: field-free variant of the standard model (pulse never switches on)
FIELD_FREE_MODEL = ModelConfig(pulse=PulseConfig(e0=0.0))


@pytest.fixture(scope="session")
def default_grid():
    return UniformGrid()


@pytest.fixture(scope="session")
def gs_default(default_grid):
    """Ground state on the production grid: (psi, energy, info)."""
    return ground_state(DEFAULT_MODEL, default_grid, tol=1e-12, full_output=True)


@pytest.fixture(scope="session")
def fitted_state(gs_default):
    """Our own LCG(4) fit of the grid ground state (ladder initialization)."""
    psi, _, _ = gs_default
    result = fit_lcg(psi, 4)
    return result


@pytest.fixture(scope="session")
def small_grid():
    """Coarser grid for integrator-order tests; keeps FFTs cheap."""
    return UniformGrid(150.0, 1024)


@pytest.fixture(scope="session")
def gs_small(small_grid):
    return ground_state(DEFAULT_MODEL, small_grid, tol=1e-12, full_output=True)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture(scope="session")
def cn_error_slope(gs_small, small_grid):
    """Global Crank-Nicolson error order on a window with the field on."""
    from rothe1d import cn_step

    psi, _, _ = gs_small
    t0, window = 22.0, 1.0

    def final_state(h):
        state = psi.copy()
        for n in range(int(round(window / h))):
            state = cn_step(state, t0 + n * h, h, DEFAULT_MODEL)
        return state

    reference = final_state(2.5e-4)
    hs = np.array([4e-3, 2e-3, 1e-3])
    errors = []
    for h in hs:
        diff = final_state(h).values - reference.values
        errors.append(np.sqrt(small_grid.dx * np.sum(np.abs(diff) ** 2)))
    return float(np.polyfit(np.log(hs), np.log(errors), 1)[0])
