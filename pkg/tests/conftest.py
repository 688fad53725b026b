import numpy as np
import pytest

from stiffid.fieldgen import GridSpec, make_grid


@pytest.fixture(scope="session")
def cube():
    """The 10 x 10 x 10 mm cube with 1 mm step (1331 nodes)."""
    return make_grid(GridSpec("cubic", 10.0, 1.0))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
