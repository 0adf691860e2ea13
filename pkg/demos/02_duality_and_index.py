"""
Fusion partial isometry and the counit index
============================================

The operator W~ on two copies of F_P (x) F_P realizes the fusion rule
H_n (x) H = H_{n+1} + H_{n-1}. Its defects are vacuum projections, and
evaluating one leg at the counit gives a Fredholm operator of index -1.
"""
from tlfock import build_chain, q_family, tl_validate
from tlfock.duality import build_wtilde, compare_wtilde, counit_index, defect_check, k_groups, wtilde_standard

t = tl_validate(q_family(0.5))
c = build_chain(t, 8)

# %%
w = build_wtilde(c)
report = defect_check(w)
for line in report.summary_lines():
    print(line)

# The closed formula for the standard form gives the same operator.
print("standard-form agreement:", compare_wtilde(w, wtilde_standard(t, c)))

# %%
# Index of V_P^* across the q family.
for q in (0.3, 0.5, 0.7, 1.0):
    tq = tl_validate(q_family(q))
    rep = counit_index(tq, build_chain(tq, 10))
    print(f"q={q}: dim ker V = {rep.check('dim_ker_V').value:.0f}, "
          f"dim ker V* = {rep.check('dim_ker_Vstar').value:.0f}, index = {rep.check('index_Vstar').value:+.0f}")

# %%
# K-groups of the Cuntz-Pimsner algebra and its K-homology.
for m in range(2, 7):
    kt, kh = k_groups(m)
    print(f"m={m}: K_0={kt.k0_description:5s} K_1={kt.k1_description:3s} "
          f"K^0={kh.k0_description:3s} K^1={kh.k1_description}")
