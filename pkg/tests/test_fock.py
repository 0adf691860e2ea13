import numpy as np
import pytest

from tlfock.errors import RangeError, ShapeError
from tlfock.fock import (GradedOp, commutator_norms, creation_left, creation_right, diag_symbol, fit_decay,
                         identity, phi_symbol, relation_suite, vacuum_projection)
from tlfock.numerics import kron, opnorm
from tlfock.qarith import phi


@pytest.mark.parametrize("fixture", ["m2_half", "m2_one", "m3_flat"])
def test_relations_hold(fixture, request):
    _, c = request.getfixturevalue(fixture)
    rep = relation_suite(c)
    assert rep.passed, rep.summary_lines()
    assert max(ch.value for ch in rep.checks) < 1e-12


def test_relations_skew_weights(m3_skew):
    _, c, _ = m3_skew
    assert relation_suite(c).passed


def test_creation_matches_full_space(m2_half):
    """L_i xi = f_{n+1}(xi_i (x) xi) and R_i xi = f_{n+1}(xi (x) xi_i) in the full tensor space."""
    _, c = m2_half
    m = c.m
    for i in (1, 2):
        e = np.zeros((m, 1))
        e[i - 1] = 1
        L, R = creation_left(c, i), creation_right(c, i)
        for n in range(4):
            full_L = c.projection(n + 1) @ kron(e, c.iota(n))
            full_R = c.projection(n + 1) @ kron(c.iota(n), e)
            assert opnorm(c.iota(n + 1) @ L.block(n) - full_L) < 1e-13
            assert opnorm(c.iota(n + 1) @ R.block(n) - full_R) < 1e-13


def test_vacuum_relations(m2_half):
    t, c = m2_half
    L = [creation_left(c, i) for i in (1, 2)]
    # L_i^* L_j on H_0 is delta_ij
    for i in range(2):
        for j in range(2):
            assert abs((L[i].H @ L[j]).block(0)[0, 0] - (i == j)) < 1e-14
    # sum_ij a_ij L_i L_j kills the vacuum
    acc = sum(t.A[i, j] * (L[i] @ L[j]).block(0) for i in range(2) for j in range(2))
    assert opnorm(acc) < 1e-14


def test_adjoint_is_blockwise_conjugate(m2_half):
    _, c = m2_half
    R = creation_right(c, 1)
    for n in range(1, c.N):
        assert np.array_equal(R.H.block(n), R.block(n - 1).conj().T)


def test_validity_narrows_under_composition(m2_half):
    _, c = m2_half
    R = creation_right(c, 1)
    RR = R @ R
    assert RR.valid_hi == R.valid_hi - 1
    with pytest.raises(RangeError):
        RR.block(R.valid_hi)


def test_gradedop_shape_check():
    with pytest.raises(ShapeError):
        GradedOp(1, {0: np.zeros((3, 1))}, (1, 2))


def test_symbols(m2_half):
    _, c = m2_half
    e0 = vacuum_projection(c.dims)
    assert e0.block(0)[0, 0] == 1 and opnorm(e0.block(1)) == 0
    ph = phi_symbol(c.dims, 0.5)
    assert ph.block(3)[0, 0] == pytest.approx(phi(3, 0.5))
    f = diag_symbol(lambda n: n**2, c.dims)
    assert np.allclose((f @ identity(c.dims)).block(4), 16 * np.eye(5))


def test_commutators_m3_bounded(m3_flat):
    t, c = m3_flat
    table = commutator_norms(c)
    assert max(z for z, _ in table.values()) < 1e-10
    C_hat, monotone = fit_decay({n: s for n, (_, s) in table.items()}, t.q)
    assert np.isfinite(C_hat) and monotone


def test_commutators_classical(m2_one):
    _, c = m2_one
    table = commutator_norms(c)
    # at q = 1 the norm is 1/(n+1), so n^(1/2) times it stays bounded
    for n, (_, s) in table.items():
        assert s == pytest.approx(1 / (n + 1), rel=1e-10)


def test_commutator_values_frozen(m2_half):
    """Oracle values from a separate full tensor-space computation, q = 0.5."""
    _, c = m2_half
    table = commutator_norms(c)
    frozen = {1: 0.8, 2: 0.34073416799996803, 3: 0.17927170868347347, 4: 0.09050265296138205}
    for n, v in frozen.items():
        assert table[n][1] == pytest.approx(v, rel=1e-10)


def test_fit_decay_trivial():
    assert fit_decay({0: 2.0, 1: 2.0, 2: 2.0}, 1.0) == (2.0, True)
    C, mono = fit_decay({n: 0.5**n for n in range(6)}, 0.5)
    assert C == pytest.approx(1.0) and mono
