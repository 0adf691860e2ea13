import numpy as np
import pytest

from tlfock import anti_diagonal_matrix, build_chain, dagger, q_family, tl_validate


@pytest.fixture(scope="session")
def m2_half():
    t = tl_validate(q_family(0.5))
    return t, build_chain(t, 10)


@pytest.fixture(scope="session")
def m2_one():
    t = tl_validate(q_family(1.0))
    return t, build_chain(t, 10)


@pytest.fixture(scope="session")
def m3_flat():
    t = tl_validate(anti_diagonal_matrix([1, 1, 1]))
    return t, build_chain(t, 6)


@pytest.fixture(scope="session")
def m3_skew():
    """m = 3 with unequal weights, so P and its dagger differ."""
    t = tl_validate(anti_diagonal_matrix([2.0, 1.0, 0.5]))
    return t, build_chain(t, 5), build_chain(dagger(t), 5)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
