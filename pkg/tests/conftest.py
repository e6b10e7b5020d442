import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from hyperdrift.models import H2Model, TreeModel  # noqa: E402


@pytest.fixture
def tree():
    return TreeModel(2, 2.0)


@pytest.fixture
def h2():
    return H2Model()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
