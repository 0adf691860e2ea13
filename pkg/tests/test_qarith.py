import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tlfock.errors import DimensionOverflowError
from tlfock.qarith import fiber_dims, phi, q_from_trace, q_int

qs = st.floats(0.05, 1.0)


def closed_q_int(n, q):
    return (q**n - q**-n) / (q - 1 / q)


@pytest.mark.parametrize("q", [0.3, 0.5, 0.9])
@pytest.mark.parametrize("n", [0, 1, 2, 5, 10])
def test_q_int_closed_form(n, q):
    assert q_int(n, q) == pytest.approx(closed_q_int(n, q), rel=1e-12)


def test_q_int_classical_and_small():
    assert q_int(7, 1.0) == 7
    assert q_int(2, 0.5) == pytest.approx(2.5)
    assert q_int(0, 0.5) == 0


@given(st.integers(1, 30), qs)
def test_q_int_recursion(n, q):
    # [2][n] = [n+1] + [n-1]
    assert q_int(2, q) * q_int(n, q) == pytest.approx(q_int(n + 1, q) + q_int(n - 1, q), rel=1e-10)


@given(st.integers(0, 40), st.floats(0.05, 0.99))
def test_phi_bounded_and_increasing(n, q):
    assert 0 <= phi(n, q) <= phi(n + 1, q) + 1e-15 <= q + 2e-15
    if q ** (2 * n) > 1e-12:
        assert phi(n, q) < phi(n + 1, q)


def test_phi_limit_and_start():
    assert phi(0, 0.5) == 0
    assert phi(60, 0.5) == pytest.approx(0.5, abs=1e-15)
    assert phi(3, 1.0) == pytest.approx(0.75)


@given(qs)
def test_q_from_trace_inverts(q):
    assert q_from_trace(q + 1 / q) == pytest.approx(q, rel=1e-10)


def test_q_from_trace_golden():
    assert q_from_trace(3.0) == pytest.approx((3 - math.sqrt(5)) / 2, rel=1e-14)


@pytest.mark.parametrize("m,expected", [
    (2, [1, 2, 3, 4, 5, 6, 7]),
    (3, [1, 3, 8, 21, 55, 144, 377]),
    (4, [1, 4, 15, 56, 209, 780, 2911]),
])
def test_fiber_dims(m, expected):
    assert fiber_dims(m, 6) == expected


def test_fiber_dims_overflow():
    with pytest.raises(DimensionOverflowError):
        fiber_dims(50, 20)
