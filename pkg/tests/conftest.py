import numpy as np
import pytest

from mirrorflow import maps, presets


@pytest.fixture(scope="session")
def simplex3():
    return maps.EntropicSimplexMap(3)


@pytest.fixture(scope="session")
def euclid2():
    return maps.EuclideanMap(2)


@pytest.fixture(scope="session")
def default_objective():
    return presets.default_sum_exp()


@pytest.fixture(scope="session")
def default_certificate(simplex3, default_objective):
    return presets.certificate_for(default_objective, simplex3)


@pytest.fixture()
def rng():
    return np.random.default_rng(171)
