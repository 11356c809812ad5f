import numpy as np
import pytest

from lamdfo import CountingOracle


def square(x):
    return float(np.sum(np.asarray(x) ** 2))


def neg_linear(x):
    return float(-x[0])


@pytest.fixture
def square_oracle():
    return CountingOracle(square, 1)


@pytest.fixture
def linear_oracle():
    return CountingOracle(neg_linear, 1)
