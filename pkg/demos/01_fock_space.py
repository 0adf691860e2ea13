"""
Fock space of a Temperley-Lieb polynomial
=========================================

Build the fibers H_n for the two-generator family with q = 0.5, look at
their dimensions, and check the Toeplitz relations level by level.
"""
import numpy as np

from tlfock import build_chain, q_family, tl_validate
from tlfock.chain import oracle_compare
from tlfock.fock import commutator_norms, creation_left, relation_suite

# The coefficient matrix of P = sqrt(2) X_2 X_1 - sqrt(1/2) X_1 X_2.
A = q_family(0.5)
t = tl_validate(A)
print("q =", t.q, " standard form:", t.standard_form)

# %%
# Fiber dimensions follow d_{n+1} = m d_n - d_{n-1}; for m = 2 that is n + 1.
c = build_chain(t, 10)
print("dims:", c.dims, " full embeddings up to level", c.N_full)

# The recursive embeddings agree with the brute-force fibers.
print("oracle residuals:", [f"{oracle_compare(c, n):.1e}" for n in range(1, 7)])

# %%
# Left creation operators are block matrices between neighbouring levels.
L1 = creation_left(c, 1)
print("L_1 block at level 3 has shape", L1.block(3).shape)

for line in relation_suite(c).summary_lines():
    print(line)

# %%
# Left and right creations commute, while [L_i^*, R_j] decays like q^n.
for n, (zero, star) in commutator_norms(c).items():
    print(f"n={n:2d}  [L,R]={zero:.1e}  ||[L*,R]||={star:.4f}  ratio={star / t.q**n:.3f}")
