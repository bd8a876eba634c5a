import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from bithash.vectors import BitVector


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_bits(rng, dim, p=0.5):
    return BitVector.from_bools(rng.random(dim) < p)
