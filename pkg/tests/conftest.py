import numpy as np
import pytest

import kdvbbm as kb


@pytest.fixture(scope="session")
def coeffs():
    return kb.DEFAULT_COEFFICIENTS


@pytest.fixture(scope="session")
def grid():
    return kb.SpectralGrid(256, 16.0 * np.pi)


@pytest.fixture(scope="session")
def small_grid():
    return kb.SpectralGrid(64, np.pi)
