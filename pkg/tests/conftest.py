import numpy as np
import pytest

from mixcens.censoring import CensoringScheme, apply_scheme
from mixcens.data import PRECIPITATION
from mixcens.distributions import WeibullParams


@pytest.fixture
def precip():
    return np.array(PRECIPITATION)


@pytest.fixture
def precip_20_1(precip):
    return apply_scheme(precip, CensoringScheme(30, 20, 1.0))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_case_ii_sample(rng, n=25, m=10, S=0.2, params=WeibullParams(1.3, 0.8)):
    """Draw complete samples until the scheme stops before the last failure."""
    if m >= n:
        raise ValueError("a Case II sample needs m < n")
    while True:
        x = (-np.log(rng.random(n)) / params.delta) ** (1.0 / params.gamma)
        sample = apply_scheme(x, CensoringScheme(n, m, S))
        if sample.n_censored > 0 and len(set(sample.failures)) >= 2:
            return sample
