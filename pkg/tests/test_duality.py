import numpy as np
import pytest

from tlfock import anti_diagonal_matrix, build_chain, q_family, tl_validate
from tlfock.duality import (build_wtilde, compare_wtilde, counit_index, counit_operator, defect_check,
                            k_groups, wtilde_standard)
from tlfock.errors import FormError, RangeError
from tlfock.numerics import opnorm


@pytest.fixture(scope="module")
def m2_chain8():
    t = tl_validate(q_family(0.5))
    return t, build_chain(t, 8)


@pytest.mark.parametrize("q", [0.5, 1.0])
def test_defects_m2(q):
    t = tl_validate(q_family(q))
    c = build_chain(t, 8)
    w = build_wtilde(c)
    rep = defect_check(w)
    assert rep.passed, rep.summary_lines()
    assert compare_wtilde(w, wtilde_standard(t, c)) < 1e-12


def test_defects_m3_skew(m3_skew):
    t, _, _ = m3_skew
    c = build_chain(t, 4)
    w = build_wtilde(c)
    assert defect_check(w).passed
    assert compare_wtilde(w, wtilde_standard(t, c)) < 1e-12


def test_general_form_defects():
    theta = 0.7
    u = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    t = tl_validate(u.T @ q_family(0.5) @ u)
    c = build_chain(t, 6)
    assert defect_check(build_wtilde(c)).passed
    with pytest.raises(FormError):
        wtilde_standard(t, c)


def test_one_letter_transfer(m2_chain8):
    """Entry (1,1) sends xi_i (x) 1 to 1 (x) xi_i."""
    _, c = m2_chain8
    w = build_wtilde(c)
    block = w.entries[(1, 1)][(1, 0)]
    assert block.shape == (2, 2)
    assert opnorm(block - np.eye(2)) < 1e-14


def test_vacuum_rows_vanish(m2_chain8):
    t, c = m2_chain8
    ws = wtilde_standard(t, c)
    # nothing to annihilate on the first leg at level 0
    assert ws.entries[(1, 1)][(0, 3)].shape[0] == 0
    assert (0, 3) not in ws.entries[(2, 1)]


def test_source_defect_at_vacuum_component(m2_chain8):
    _, c = m2_chain8
    w = build_wtilde(c)
    g = 3
    M = w.grade_matrix(g)
    s = w.component_slice(g, (1, 0, g))
    D = np.eye(M.shape[0]) - M.conj().T @ M
    assert opnorm(D[s, s] - np.eye(s.stop - s.start)) < 1e-12


def test_grade_range(m2_chain8):
    _, c = m2_chain8
    w = build_wtilde(c)
    with pytest.raises(RangeError):
        w.grade_matrix(w.grade_max + 1)


@pytest.mark.parametrize("q", [0.3, 0.5, 0.7, 1.0])
def test_counit_index(q):
    t = tl_validate(q_family(q))
    rep = counit_index(t, build_chain(t, 10))
    assert rep.passed, rep.summary_lines()
    assert rep.check("index_Vstar").value == -1
    assert rep.check("singular_value_gap").value >= 1e3


def test_counit_is_coisometry_q_half(m2_chain8):
    t, c = m2_chain8
    V = counit_operator(t, c, 4).matrix
    # rows of the two target copies at levels <= 3 are fed only by source levels <= 4
    offs = np.cumsum([0] + [c.dims[n] for n in range(6)])
    T = offs[-1]
    rows = np.r_[0:offs[4], T:T + offs[4]]
    part = V[rows]
    assert opnorm(part @ part.conj().T - np.eye(len(rows))) < 1e-12


def test_counit_rejects_other_inputs(m3_flat):
    t, c = m3_flat
    with pytest.raises(FormError):
        counit_index(t, c)
    t2 = tl_validate(anti_diagonal_matrix([2.0, 1.0]))  # |a_1|^2 = 2 while 1/q = 1 + ... differs
    if abs(abs(t2.anti_diagonal()[0]) ** 2 - 1 / t2.q) > 1e-6:
        with pytest.raises(FormError):
            counit_index(t2, build_chain(t2, 5))


@pytest.mark.parametrize("m,k0,k1", [
    (2, "Z", "Z"), (3, "0", "0"), (4, "Z/2Z", "0"), (5, "Z/3Z", "0"), (6, "Z/4Z", "0"),
])
def test_k_groups(m, k0, k1):
    kt, kh = k_groups(m)
    assert (kt.k0_description, kt.k1_description) == (k0, k1)
    assert (kh.k1_description, kh.k0_description) == (k0, k1)
    assert kt.side == "K-theory" and kh.side == "K-homology"


def test_k_groups_range():
    with pytest.raises(RangeError):
        k_groups(1)
