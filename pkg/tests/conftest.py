import numpy as np
import pytest

from ca_reservoir.bitcore import stream


@pytest.fixture
def rng():
    return stream(12345, 0)


def make_rng(index: int = 0, seed: int = 12345) -> np.random.Generator:
    return stream(seed, index)
