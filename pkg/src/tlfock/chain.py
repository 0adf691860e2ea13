"""Fibers H_n of the subproduct system in compressed coordinates.

H_n is stored through the right embedding J_n: C^{d_n} -> C^{d_{n-1}} (x) C^m,
an isometry onto H_n inside H_{n-1} (x) H. Composing the J's gives the full
embedding iota_n into (C^m)^{(x) n}; the left embeddings K_n into
C^m (x) C^{d_{n-1}} are read off from the full ones.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BudgetError, FusionMismatchError, RangeError
from .numerics import kernel_onb, kron, opnorm
from .qarith import fiber_dims
from .tlpoly import TLData

DEFAULT_BUDGET = 8_000_000
RANK_TOL = 1e-10
BRUTEFORCE_GUARD = 10**6


@dataclass(frozen=True, eq=False)
class Chain:
    t: TLData
    N: int
    dims: tuple[int, ...]
    right_emb: tuple[np.ndarray, ...]  # index n -> J_n, n = 0..N (J_0 is a 0x1 placeholder)
    left_emb: tuple[np.ndarray, ...]  # index n -> K_n, n = 0..N_full
    full_emb: tuple[np.ndarray, ...]  # index n -> iota_n, n = 0..N_full
    N_full: int

    @property
    def m(self) -> int:
        return self.t.m

    def dim(self, n: int) -> int:
        if n < 0:
            return 0
        if n > self.N:
            raise RangeError(f"level {n} beyond truncation N={self.N}")
        return self.dims[n]

    def projection(self, n: int) -> np.ndarray:
        """f_n = iota_n iota_n^* on (C^m)^{(x) n}."""
        iota = self.iota(n)
        return iota @ iota.conj().T

    def iota(self, n: int) -> np.ndarray:
        if not 0 <= n <= self.N_full:
            raise RangeError(f"full embedding at level {n} unavailable (N_full={self.N_full})")
        return self.full_emb[n]

    def J(self, n: int) -> np.ndarray:
        if not 1 <= n <= self.N:
            raise RangeError(f"right embedding at level {n} unavailable (N={self.N})")
        return self.right_emb[n]

    def K(self, n: int) -> np.ndarray:
        if not 1 <= n <= self.N_full:
            raise RangeError(f"left embedding at level {n} unavailable (N_full={self.N_full})")
        return self.left_emb[n]


def build_chain(t: TLData, N: int, budget: int = DEFAULT_BUDGET) -> Chain:
    """Construct J_1..J_N recursively, and iota_n, K_n while they fit in ``budget``."""
    m = t.m
    if N < 1:
        raise RangeError("N must be at least 1")
    expected = fiber_dims(m, N)
    if N >= 2 and budget < m * m * expected[2]:
        raise BudgetError(f"budget {budget} too small to reach level 2")
    vstar = t.v.conj().T  # 1 x m^2

    eye_m = np.eye(m, dtype=np.complex128)
    J = [np.zeros((0, 1), dtype=np.complex128), eye_m.copy()]
    iota = [np.ones((1, 1), dtype=np.complex128), eye_m.copy()]
    K = [np.zeros((0, 1), dtype=np.complex128), eye_m.copy()]
    dims = [1, m]
    full = True
    for n in range(1, N):
        # H_{n+1} = (H_n (x) H) minus H_{n-1} (x) P: only the last two slots carry a new constraint
        constraint = kron(np.eye(dims[n - 1]), vstar) @ kron(J[n], eye_m)
        Jn1 = kernel_onb(constraint, RANK_TOL)
        want = m * dims[n] - dims[n - 1]
        if Jn1.shape[1] != want:
            raise FusionMismatchError(
                f"level {n + 1}: kernel dimension {Jn1.shape[1]} != {want}")
        J.append(Jn1)
        dims.append(want)
        if full and m ** (n + 1) * want <= budget:
            nxt = kron(iota[n], eye_m) @ Jn1
            iota.append(nxt)
            K.append(kron(eye_m, iota[n]).conj().T @ nxt)
        else:
            full = False
    if dims != expected:
        raise FusionMismatchError(f"dimensions {dims} differ from {expected}")
    return Chain(t=t, N=N, dims=tuple(dims), right_emb=tuple(J), left_emb=tuple(K),
                 full_emb=tuple(iota), N_full=len(iota) - 1)


def constraint_stack(t: TLData, n: int) -> np.ndarray:
    """Rows (I^{(x) i} (x) v^* (x) I^{(x)(n-2-i)}) for i = 0..n-2, stacked."""
    m = t.m
    vstar = t.v.conj().T
    blocks = [kron(kron(np.eye(m**i), vstar), np.eye(m ** (n - 2 - i))) for i in range(n - 1)]
    return np.vstack(blocks)


def bruteforce_fiber(t: TLData, n: int) -> np.ndarray:
    """Projection f_n onto H_n computed from all n-1 constraints at once."""
    m = t.m
    if m**n > BRUTEFORCE_GUARD:
        raise BudgetError(f"m^n = {m**n} exceeds brute-force guard {BRUTEFORCE_GUARD}")
    if n <= 1:
        return np.eye(m**n, dtype=np.complex128)
    Q = kernel_onb(constraint_stack(t, n), RANK_TOL)
    return Q @ Q.conj().T


def oracle_compare(c: Chain, n: int) -> float:
    """||iota_n iota_n^* - f_n|| against the brute-force projection."""
    if n > c.N_full:
        raise RangeError(f"level {n} beyond N_full={c.N_full}")
    if n == 0:
        return 0.0
    return opnorm(c.projection(n) - bruteforce_fiber(c.t, n))


def sweedler_split(c: Chain, n: int, k: int) -> np.ndarray:
    """(iota_k (x) iota_{n-k})^* iota_n: coordinates of H_n inside H_k (x) H_{n-k}."""
    if not 0 <= k <= n:
        raise RangeError(f"split position {k} outside 0..{n}")
    if n > c.N_full:
        raise RangeError(f"level {n} beyond N_full={c.N_full}")
    m = c.m
    ik, ir, iota = c.iota(k), c.iota(n - k), c.iota(n)
    # contract without forming the Kronecker product of the two embeddings
    T = iota.reshape(m**k, m ** (n - k), -1)
    T = np.tensordot(ik.conj(), T, axes=([0], [0]))  # d_k x m^{n-k} x d_n
    T = np.tensordot(ir.conj(), T, axes=([0], [1]))  # d_{n-k} x d_k x d_n
    return T.transpose(1, 0, 2).reshape(ik.shape[1] * ir.shape[1], -1)


def projection_in_full(c: Chain, n: int) -> np.ndarray:
    """f_n, taken from the chain when available, else from the brute-force route."""
    if n <= c.N_full:
        return c.projection(n)
    return bruteforce_fiber(c.t, n)
