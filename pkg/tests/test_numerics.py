import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from tlfock.errors import DimensionOverflowError, ShapeError
from tlfock.numerics import (as_cmat, basis_vector, isometry_defect, kernel_onb, kron, opnorm,
                             unitary_defect)

small = arrays(np.float64, st.tuples(st.integers(1, 4), st.integers(1, 4)),
               elements=st.floats(-3, 3, allow_nan=False, allow_subnormal=False))
# integer entries keep products exact, so associativity can be checked bitwise
integral = arrays(np.float64, st.tuples(st.integers(1, 3), st.integers(1, 3)), elements=st.integers(-9, 9))


def test_kron_diagonal_order():
    out = kron(np.diag([1, 2]), np.diag([1, 3]))
    assert np.array_equal(out, np.diag([1, 3, 2, 6]).astype(complex))


def test_kron_entry_convention():
    a = np.arange(6).reshape(2, 3)
    b = np.arange(4).reshape(2, 2) + 1
    out = kron(a, b)
    assert out.shape == (4, 6)
    assert out[1 * 2 + 1, 2 * 2 + 0] == a[1, 2] * b[1, 0]


@settings(max_examples=40, deadline=None)
@given(integral, integral, integral)
def test_kron_associative(a, b, c):
    assert np.array_equal(kron(kron(a, b), c), kron(a, kron(b, c)))


def test_kron_overflow_guard():
    big = np.zeros((2**16, 1))
    with pytest.raises(DimensionOverflowError):
        kron(big, big)


@settings(max_examples=40, deadline=None)
@given(small)
def test_opnorm_matches_numpy(a):
    assert opnorm(a) == pytest.approx(np.linalg.norm(a, 2), abs=1e-12)


def test_opnorm_empty_and_unitary():
    assert opnorm(np.zeros((0, 3))) == 0.0
    assert opnorm(np.array([[0, 1], [1, 0]])) == pytest.approx(1.0)


@settings(max_examples=40, deadline=None)
@given(small)
def test_kernel_onb_properties(a):
    Q = kernel_onb(a)
    assert Q.shape[0] == a.shape[1]
    assert opnorm(a @ Q) <= 1e-9 * max(1.0, opnorm(a))
    assert isometry_defect(Q) <= 1e-12
    assert Q.shape[1] == a.shape[1] - np.linalg.matrix_rank(a, tol=1e-10 * max(opnorm(a), 1e-300))


def test_kernel_onb_known():
    Q = kernel_onb(np.array([[1.0, 1.0]]))
    assert Q.shape == (2, 1)
    assert abs(abs(Q[0, 0]) - 2**-0.5) < 1e-14
    assert kernel_onb(np.zeros((0, 3))).shape == (3, 3)


def test_defects_and_basis():
    theta = 0.3
    u = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    assert unitary_defect(u) < 1e-15
    assert isometry_defect(u[:, :1]) < 1e-15
    assert unitary_defect(2 * u) == pytest.approx(3.0)
    e = basis_vector(3, 1)
    assert e.shape == (3, 1) and e[1, 0] == 1 and e.sum() == 1


def test_as_cmat_rejects_bad_input():
    with pytest.raises(ShapeError):
        as_cmat(np.zeros((2, 2, 2)))
    assert as_cmat([[1, 2]]).dtype == np.complex128
