import numpy as np
import pytest

from tlfock import anti_diagonal_matrix, build_chain, tl_validate
from tlfock.errors import FormError, InputError, RangeError
from tlfock.kms import (KmsConfig, Word, all_words, closed_form, kms_check, normal_form, normal_monomials,
                        normal_order, omega, omega_vectors, pi_k_eval, psi_k, random_pairs, woronowicz_rho)
from tlfock.qarith import q_int


def test_word_parsing_and_algebra():
    w = Word.parse("1 2* 3")
    assert w.letters == ((1, False), (2, True), (3, False))
    assert (w.creations, w.annihilations, w.degree) == (2, 1, 2)
    assert str(w.adjoint()) == "3* 2 1*"
    assert not w.is_normal() and Word.parse("1 1 2* 1*").is_normal()
    assert str(Word()) == "1"
    with pytest.raises(InputError):
        Word.parse("0")
    with pytest.raises(InputError):
        KmsConfig(k_margin=0)


def test_rho(m2_half):
    t, _ = m2_half
    rho = woronowicz_rho(t)
    assert np.allclose(np.diag(rho), [2.0, 0.5])
    assert abs(np.trace(rho).real - 2.5) < 1e-12


def test_rho_classical(m3_flat):
    t, _ = m3_flat
    assert np.allclose(woronowicz_rho(t), np.eye(3))


def test_rho_needs_standard_form():
    theta = 0.4
    u = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    A = u.T @ np.array([[0, 2**0.5], [-(0.5**0.5), 0]]) @ u
    with pytest.raises(FormError):
        woronowicz_rho(tl_validate(A))


def test_pi_k_small_cases(m2_half):
    _, c = m2_half
    assert np.array_equal(pi_k_eval(c, Word(), 3), np.eye(4))
    assert np.allclose(pi_k_eval(c, Word.parse("1 1*"), 0), 0)
    assert np.allclose(pi_k_eval(c, Word.parse("1* 1"), 0), 1)
    with pytest.raises(RangeError):
        pi_k_eval(c, Word.parse("1 1 1"), c.N_full - 1)


@pytest.mark.parametrize("i,j", [(1, 1), (1, 2), (2, 2)])
def test_degree_one_values(m2_half, i, j):
    t, c = m2_half
    q = t.q
    two = q_int(2, q)
    a2 = np.abs(t.anti_diagonal()) ** 2
    assert omega(t, c, Word(((i, False), (j, True)))).value == pytest.approx((i == j) * a2[i - 1] / two, abs=1e-14)
    assert omega(t, c, Word(((j, True), (i, False)))).value == pytest.approx((i == j) / q / two, abs=1e-14)


def test_state_normalized(m2_half):
    t, c = m2_half
    assert omega(t, c, Word()).value == pytest.approx(1.0)
    total = sum(omega(t, c, Word(((i, False), (i, True)))).value for i in (1, 2))
    assert abs(total - 1) < 1e-12


@pytest.mark.parametrize("n", [1, 2, 3])
def test_closed_forms_m2(m2_half, n):
    t, c = m2_half
    for w in normal_monomials(2, n):
        r = omega(t, c, w)
        assert r.closed_form_residual < 1e-10, str(w)
        assert r.stabilization_residual < 1e-10


def test_closed_forms_m3_skew(m3_skew):
    t, _, _ = m3_skew
    c = build_chain(t, 6)
    cfg = KmsConfig()
    for n in (1, 2):
        for w in normal_monomials(3, n):
            assert omega(t, c, w, cfg).closed_form_residual < 1e-10, str(w)


def test_unbalanced_vanish(m2_half):
    t, c = m2_half
    for w in all_words(2, 3):
        assert abs(omega(t, c, w).value) < 1e-12


def test_normal_order_reaches_toeplitz_limit(m2_half):
    """The raw Toeplitz evaluation converges to the quotient value like q^(2k)."""
    t, _ = m2_half
    c = build_chain(t, 12)
    w = Word.parse("2* 1* 1 2")
    k = 10
    raw = psi_k(c, t, pi_k_eval(c, w, k), k)
    assert abs(raw - omega(t, c, w).value) < 1e-6


def test_normal_order_terms(m2_half):
    t, _ = m2_half
    terms = normal_order(t, Word.parse("1* 1"))
    assert terms[Word()] == pytest.approx(1.0)
    assert all(wd.is_normal() for wd in terms)


def test_vectors_form_agrees(m2_half):
    t, c = m2_half
    w = Word.parse("1 2 1* 2*")
    nf = normal_form(c, w)
    assert (nf.p, nf.r) == (2, 2)
    assert omega_vectors(t, c, nf) == pytest.approx(closed_form(c, t, w), abs=1e-14)


def test_kms_condition_examples(m2_half):
    t, c = m2_half
    assert kms_check(t, c, Word.parse("1"), Word.parse("1*")) < 1e-12
    assert kms_check(t, c, Word(), Word()) == 0


@pytest.mark.parametrize("m,fixture", [(2, "m2_half"), (3, "m3_skew")])
def test_kms_random_pairs(m, fixture, request):
    t, *_ = request.getfixturevalue(fixture)
    c = build_chain(t, 7 if m == 2 else 6)
    deg = 3 if m == 2 else 2
    worst = max(kms_check(t, c, x, y) for x, y in random_pairs(m, 100, max_degree=deg, seed=11))
    assert worst < 1e-10


def test_positivity(m2_half, rng):
    t, c = m2_half
    for _ in range(20):
        length = int(rng.integers(1, 4))
        idx = rng.integers(1, 3, size=length)
        stars = rng.integers(0, 2, size=length).astype(bool)
        w = Word(tuple((int(i), bool(s)) for i, s in zip(idx, stars)))
        assert omega(t, c, w.adjoint() * w).value.real > -1e-12


def test_random_pairs_seeded():
    a = list(random_pairs(2, 5, seed=3))
    b = list(random_pairs(2, 5, seed=3))
    assert a == b
