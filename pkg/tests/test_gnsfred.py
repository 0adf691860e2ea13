import numpy as np
import pytest

from tlfock import anti_diagonal_matrix, build_chain, dagger, q_family, tl_validate
from tlfock.errors import AssumptionError, RangeError
from tlfock.gnsfred import (C2_constant, GnsGraded, build_V, commutator_oracle, compact_commutator_report,
                            fred_commutator_decay, fredholm_report, majorant, projection_defect,
                            projection_defect_full, projection_estimate, reversal_map)
from tlfock.numerics import opnorm, unitary_defect


@pytest.fixture(scope="module")
def m3_pair():
    t = tl_validate(anti_diagonal_matrix([1, 1, 1]))
    return t, build_chain(t, 5), build_chain(dagger(t), 5)


@pytest.fixture(scope="module")
def m2_pair():
    t = tl_validate(q_family(0.5))
    return t, build_chain(t, 10), build_chain(dagger(t), 10)


def test_gram():
    g = GnsGraded("P", 0.5)
    assert g.gram(0) == 1
    assert g.gram(1) == pytest.approx(2 / 2.5)


@pytest.mark.parametrize("j", range(0, 6))
def test_reversal_unitary(m3_skew, j):
    _, c, cd = m3_skew
    R = reversal_map(c, cd, j)
    assert unitary_defect(R) < 1e-10
    if j <= 1:
        assert np.allclose(R, np.eye(R.shape[0]))


def test_reversal_symmetric_case():
    t = tl_validate(np.eye(2))  # symmetric coefficients, so P and its dagger agree
    c = build_chain(t, 5)
    assert unitary_defect(reversal_map(c, c, 4)) < 1e-12


def test_V_is_gns_isometry(m3_pair, m2_pair):
    for t, c, cd in (m3_pair, m2_pair):
        v = build_V(c, cd, min(c.N_full, 5))
        assert max(v.isometry_residuals.values()) < 1e-10


def test_V_degree_one_by_hand(m2_pair):
    t, c, cd = m2_pair
    v = build_V(c, cd, 2)
    q, g1 = t.q, GnsGraded("P", t.q).gram(1)
    # ||V xi_i||^2 = sum_k w^2 g_k g_{1-k} = (q/2)(q^-1 + q^-1) = 1
    vec = np.zeros((2, 1))
    vec[0] = 1
    comps = [blk @ vec for blk in v.components[1]]
    assert sum(g1 * np.vdot(x, x).real for x in comps) == pytest.approx(1.0)


def test_V_needs_q_below_one():
    t = tl_validate(q_family(1.0))
    c = build_chain(t, 4)
    with pytest.raises(AssumptionError):
        build_V(c, c, 3)


def test_V_range(m3_pair):
    _, c, cd = m3_pair
    with pytest.raises(RangeError):
        build_V(c, cd, c.N_full + 1)


def test_projection_defect_matches_dense(m3_pair):
    _, c, _ = m3_pair
    for n in range(1, 5):
        for k in range(n):
            assert projection_defect(c, n, k) == pytest.approx(projection_defect_full(c, n, k), abs=1e-12)


def test_projection_estimate_shape(m2_pair):
    t, c, _ = m2_pair
    est = projection_estimate(c, 6)
    assert est.values[(1, 0)] == pytest.approx(1.0)
    for n in range(2, 6):
        vals = [est.values[(n, k)] for k in range(n)]
        assert all(b < a for a, b in zip(vals, vals[1:]))
    assert np.isfinite(est.C1_hat)
    assert all(v <= est.C1_hat * t.q**k + 1e-15 for (n, k), v in est.values.items())


def test_C2():
    q = 0.5
    # direct (cancellation-prone) formula at small k agrees
    direct = max(abs(1 - np.sqrt((1 - q ** (2 * k)) / (1 - q ** (2 * k + 2)))) / q ** (2 * k) for k in range(1, 12))
    assert C2_constant(q) == pytest.approx(direct, rel=1e-8)


def test_commutator_oracle_m3(m3_pair):
    _, c, cd = m3_pair
    v = build_V(c, cd, 5)
    table = fred_commutator_decay(v, c, cd)
    for n in range(1, 5):
        direct = max(commutator_oracle(c, i, n) for i in range(1, 4))
        assert table["s"][n]["c_n"] == pytest.approx(direct, abs=1e-8)
    assert table["s"][1]["c_n"] == pytest.approx(0.6183981126603831, rel=1e-10)


def test_decay_below_majorant(m2_pair):
    t, c, cd = m2_pair
    v = build_V(c, cd, 10)
    table = fred_commutator_decay(v, c, cd)
    for side in ("s", "t"):
        rows = table[side]
        assert all(r["c_n"] <= r["bound_n"] for r in rows)
        assert rows[-1]["c_n"] < rows[1]["c_n"]


def test_majorant_decreases():
    vals = [majorant(n, 0.5, 1.0, C2_constant(0.5)) for n in range(1, 30)]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_F_is_symmetry_and_commutators_decay(m3_skew):
    t, c, cd = m3_skew
    v = build_V(c, cd, 5)
    rep = compact_commutator_report(v, c, cd)
    assert rep.passed, rep.summary_lines()


def test_fredholm_report_m3(m3_pair):
    _, c, cd = m3_pair
    assert fredholm_report(c, cd, 5).passed
