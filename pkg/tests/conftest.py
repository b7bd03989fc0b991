"""Shared fixtures: seeded vector families and small helpers"""

from fractions import Fraction

import numpy as np
import pytest

from ovapprox.models import VectorFamily
from ovapprox.rng import SeededRng

TEST_SEED = 20190418


@pytest.fixture
def rng():
    """Fresh root stream with the fixed test seed"""
    return SeededRng(TEST_SEED)


@pytest.fixture
def family_factory():
    """Build a uniform random family: factory(n, d, seed, p=1/2, sparse_bound=None)"""

    def make(n, d, seed, p=Fraction(1, 2), sparse_bound=None):
        flags = SeededRng(seed).bernoulli(n * d, p).reshape(n, d)
        return VectorFamily.from_bool(flags, sparse_bound=sparse_bound)

    return make


@pytest.fixture
def sparse_factory():
    """Build a family of dimension m with every weight at most bound"""

    def make(n, m, bound, seed):
        stream = SeededRng(seed)
        flags = np.zeros((n, m), dtype=bool)
        for row in range(n):
            weight = stream.below(bound + 1)
            order = stream.permutation(m)
            flags[row, list(order[:weight])] = True
        return VectorFamily.from_bool(flags, sparse_bound=bound)

    return make
