"""
KMS state and the Fredholm module
=================================

Evaluate the invariant state on words in the generators, test the KMS
condition, and then build the GNS isometry V and the symmetry F = 2VV* - 1.
"""
import numpy as np

from tlfock import build_chain, dagger, q_family, tl_validate
from tlfock.gnsfred import build_V, fred_commutator_decay, fredholm_report, projection_estimate
from tlfock.kms import Word, kms_check, omega, random_pairs, woronowicz_rho

t = tl_validate(q_family(0.5))
c = build_chain(t, 10)
print("rho =", np.diag(woronowicz_rho(t)).real)

# %%
# Words are written with '*' marking an adjoint: "1 2*" is s_1 s_2^*.
for text in ("1 1*", "2 2*", "1* 1", "1 2 2* 1*", "2 1* 1 2*"):
    val = omega(t, c, Word.parse(text))
    # only normal-ordered words have a closed form to compare against
    res = "n/a" if val.closed_form_residual is None else f"{val.closed_form_residual:.1e}"
    print(f"omega({text}) = {val.value.real:.6f}  (closed form residual {res})")

worst = max(kms_check(t, c, x, y) for x, y in random_pairs(2, 100, max_degree=3, seed=7))
print("worst KMS residual over 100 pairs:", worst)

# %%
# The GNS isometry needs q < 1.
cd = build_chain(dagger(t), 10)
v = build_V(c, cd, 10)
print("isometry residual:", max(v.isometry_residuals.values()))

est = projection_estimate(c, 6)
print("C1_hat =", est.C1_hat)

table = fred_commutator_decay(v, c, cd)
for row in table["s"][1:]:
    print(f"n={row['n']:2d}  c_n={row['c_n']:.4f}  bound={row['bound_n']:.4f}")

# %%
for line in fredholm_report(c, cd, 10).summary_lines():
    print(line)
