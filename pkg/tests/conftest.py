import numpy as np
import pytest

from sicode.harness import build_codes
from sicode.ldpc import construct_code


@pytest.fixture(scope="session")
def codes_10k():
    """The default desk-scale component codes (N = 10000), built once."""
    return build_codes(10000, "regular_3_6", (1, 2))


@pytest.fixture(scope="session")
def codes_200():
    return tuple(construct_code(200, 0.5, "regular_3_6", seed=s) for s in (1, 2))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
