import numpy as np
import pytest

from k3sw import sw
from k3sw.lattice import enumerate_roots, pick_block_roots, split_roots


@pytest.fixture(scope="session")
def roots15():
    return split_roots(enumerate_roots(1.5))


@pytest.fixture(scope="session")
def roots2():
    return split_roots(enumerate_roots(2.0))


@pytest.fixture(scope="session")
def picks(roots15):
    return pick_block_roots(roots15, count=10)


@pytest.fixture(scope="session")
def family(roots15, picks):
    return sw.build_family(picks[0], roots15, seed=0)


@pytest.fixture(scope="session")
def e8_family(roots15, picks):
    return sw.build_family(picks[3], roots15, seed=0)


@pytest.fixture(scope="session")
def matrix10(roots15, picks):
    return sw.sw_matrix(picks, picks + [-p for p in picks], roots15, seed=0)


@pytest.fixture
def rng():
    return np.random.default_rng(20261014)
