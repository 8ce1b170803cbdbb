import pytest

from tomokit import core


@pytest.fixture(scope="session")
def grid():
    return core.default_grid()


@pytest.fixture(scope="session")
def small_grid():
    return core.make_grid(-10.0, 10.0, 384)


@pytest.fixture(scope="session")
def vacuum(grid):
    return core.sample_state(core.GaussianPreset(), grid)
