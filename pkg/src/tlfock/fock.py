"""Truncated Fock space operators and the Toeplitz relations.

A :class:`GradedOp` stores one block per source level n, mapping C^{d_n} to
C^{d_{n+shift}}. Only levels where the block is the true restriction of the
Fock-space operator are stored, so compositions and sums automatically shrink
to the levels where the result is exact.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .chain import Chain
from .errors import RangeError, ShapeError
from .numerics import basis_vector, kron, opnorm
from .qarith import phi
from .report import Check, Report


@dataclass(frozen=True, eq=False)
class GradedOp:
    shift: int
    blocks: Mapping[int, np.ndarray]
    dims: tuple[int, ...]

    def __post_init__(self):
        levels = sorted(self.blocks)
        if levels and levels != list(range(levels[0], levels[-1] + 1)):
            raise RangeError(f"validity levels are not an interval: {levels}")
        for n, b in self.blocks.items():
            if b.shape != (self.dim(n + self.shift), self.dim(n)):
                raise ShapeError(f"block at level {n} has shape {b.shape}")

    @property
    def valid_lo(self) -> int:
        return min(self.blocks) if self.blocks else 0

    @property
    def valid_hi(self) -> int:
        return max(self.blocks) if self.blocks else -1

    def levels(self) -> range:
        return range(self.valid_lo, self.valid_hi + 1)

    def dim(self, n: int) -> int:
        if n < 0:
            return 0
        if n >= len(self.dims):
            raise RangeError(f"level {n} beyond truncation")
        return self.dims[n]

    def block(self, n: int) -> np.ndarray:
        if n in self.blocks:
            return self.blocks[n]
        if n < 0 or n + self.shift < 0:
            return np.zeros((self.dim(n + self.shift), self.dim(n)), dtype=np.complex128)
        raise RangeError(f"level {n} outside validity interval [{self.valid_lo}, {self.valid_hi}]")

    def __matmul__(self, other: "GradedOp") -> "GradedOp":
        out = {}
        for n in other.levels():
            mid = n + other.shift
            if mid < 0 or mid in self.blocks:
                out[n] = self.block(mid) @ other.block(n)
        return GradedOp(self.shift + other.shift, out, _longer(self.dims, other.dims))

    def _combine(self, other: "GradedOp", sign: float) -> "GradedOp":
        if self.shift != other.shift:
            raise ValueError("cannot add operators with different shifts")
        common = set(self.blocks) & set(other.blocks)
        blocks = {n: self.blocks[n] + sign * other.blocks[n] for n in common}
        return GradedOp(self.shift, blocks, _longer(self.dims, other.dims))

    def __add__(self, other):
        return self._combine(other, 1.0)

    def __sub__(self, other):
        return self._combine(other, -1.0)

    def __mul__(self, scalar) -> "GradedOp":
        return GradedOp(self.shift, {n: scalar * b for n, b in self.blocks.items()}, self.dims)

    __rmul__ = __mul__

    @property
    def H(self) -> "GradedOp":
        """Adjoint; levels whose image would be H_{-k} become zero blocks."""
        s = self.shift
        out = {n + s: b.conj().T for n, b in self.blocks.items() if n + s >= 0}
        if s > 0 and self.valid_lo == 0:
            for n in range(s):
                out[n] = np.zeros((0, self.dim(n)), dtype=np.complex128)
        return GradedOp(-s, out, self.dims)

    def restrict(self, lo: int, hi: int) -> "GradedOp":
        return GradedOp(self.shift, {n: b for n, b in self.blocks.items() if lo <= n <= hi}, self.dims)

    def norms(self) -> dict[int, float]:
        return {n: opnorm(b) for n, b in self.blocks.items()}


def _longer(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
    return a if len(a) >= len(b) else b


def zero_op(dims, shift: int, lo: int, hi: int) -> GradedOp:
    blocks = {}
    for n in range(lo, hi + 1):
        tgt = n + shift
        blocks[n] = np.zeros((dims[tgt] if tgt >= 0 else 0, dims[n]), dtype=np.complex128)
    return GradedOp(shift, blocks, tuple(dims))


def creation_right(c: Chain, i: int) -> GradedOp:
    """R_i xi = f_{n+1}(xi (x) xi_i); generator index ``i`` is 1-based."""
    m = c.m
    if not 1 <= i <= m:
        raise RangeError(f"generator index {i} outside 1..{m}")
    e = basis_vector(m, i - 1)
    blocks = {n: c.J(n + 1).conj().T @ kron(np.eye(c.dims[n]), e) for n in range(c.N)}
    return GradedOp(1, blocks, c.dims)


def creation_left(c: Chain, i: int) -> GradedOp:
    """L_i xi = f_{n+1}(xi_i (x) xi); available up to level N_full - 1."""
    m = c.m
    if not 1 <= i <= m:
        raise RangeError(f"generator index {i} outside 1..{m}")
    e = basis_vector(m, i - 1)
    blocks = {n: c.K(n + 1).conj().T @ kron(e, np.eye(c.dims[n])) for n in range(c.N_full)}
    return GradedOp(1, blocks, c.dims[: c.N_full + 1])


def diag_symbol(f: Callable[[int], complex], dims, N: int | None = None) -> GradedOp:
    """Multiplication by f(n) on H_n."""
    dims = tuple(dims)
    top = len(dims) - 1 if N is None else N
    return GradedOp(0, {n: f(n) * np.eye(dims[n], dtype=np.complex128) for n in range(top + 1)}, dims)


def identity(dims) -> GradedOp:
    return diag_symbol(lambda n: 1.0, dims)


def vacuum_projection(dims) -> GradedOp:
    return diag_symbol(lambda n: 1.0 if n == 0 else 0.0, dims)


def phi_symbol(dims, q: float, power: float = 1.0) -> GradedOp:
    return diag_symbol(lambda n: phi(n, q) ** power, dims)


def max_residual(op: GradedOp, lo: int, hi: int) -> float:
    """Largest block norm over source levels lo..hi (all must be valid)."""
    worst = 0.0
    for n in range(lo, hi + 1):
        worst = max(worst, opnorm(op.block(n)))
    return worst


def _family_relations(gens, coeffs: np.ndarray, dims, q: float, cap: int) -> dict[str, float]:
    m = len(gens)
    one = identity(dims)
    ph = phi_symbol(dims, q)
    e0 = vacuum_projection(dims)

    total = gens[0] @ gens[0].H
    for S in gens[1:]:
        total = total + S @ S.H
    row_sum = max_residual(total - (one - e0), 0, cap)

    quad = None
    for i in range(m):
        for j in range(m):
            if coeffs[i, j] != 0:
                term = coeffs[i, j] * (gens[i] @ gens[j])
                quad = term if quad is None else quad + term
    ideal = max_residual(quad, 0, cap - 2)

    disp = 0.0
    for i in range(m):
        for j in range(m):
            acc = None
            for k in range(m):
                for l in range(m):
                    c = coeffs[i, k] * np.conj(coeffs[j, l])
                    if c != 0:
                        term = c * (gens[k] @ gens[l].H)
                        acc = term if acc is None else acc + term
            lhs = gens[i].H @ gens[j] + ph @ acc
            rhs = one * (1.0 if i == j else 0.0)
            disp = max(disp, max_residual(lhs - rhs, 0, cap - 1))

    gauge = 0.0
    symbols = [lambda n: 1.0 if n == 0 else 0.0, lambda n: phi(n, q), lambda n: np.cos(1.3 * n) + 0.5j * n]
    for f in symbols:
        fo = diag_symbol(f, dims)
        shifted = diag_symbol(lambda n, f=f: f(n + 1), dims)
        for S in gens:
            gauge = max(gauge, max_residual(fo @ S - S @ shifted, 0, cap - 1))
    return {"row_sum": row_sum, "ideal": ideal, "displacement": disp, "gauge": gauge}


def relation_suite(c: Chain, tol: float = 1e-8) -> Report:
    """Residuals of the four Toeplitz relation families for L (coefficients A)
    and R (coefficients A^t)."""
    t = c.t
    report = Report("relations")
    families = {
        "L": ([creation_left(c, i) for i in range(1, c.m + 1)], t.A, c.N_full),
        "R": ([creation_right(c, i) for i in range(1, c.m + 1)], t.A.T, c.N),
    }
    for name, (gens, coeffs, cap) in families.items():
        dims = gens[0].dims
        res = _family_relations(gens, coeffs, dims, t.q, cap)
        for rel, val in res.items():
            report.add(Check(f"{name}.{rel}", val, tol, provenance="run tolerance; exact identity on the truncation interior"))
        report.constants[f"{name}.validity_cap"] = cap
    return report


def commutator_norms(c: Chain) -> dict[int, tuple[float, float]]:
    """Level n -> (max ||[L_i, R_j]|_{H_n}||, max ||[L_i^*, R_j]|_{H_n}||)."""
    if c.N_full < 2:
        raise RangeError("need N_full >= 2")
    L = [creation_left(c, i) for i in range(1, c.m + 1)]
    R = [creation_right(c, i) for i in range(1, c.m + 1)]
    table: dict[int, list[float]] = {}
    for Li in L:
        for Rj in R:
            zero = Li @ Rj - Rj @ Li
            star = Li.H @ Rj - Rj @ Li.H
            for n in range(1, c.N_full):
                z = opnorm(zero.block(n)) if n in zero.blocks else None
                s = opnorm(star.block(n))
                cur = table.setdefault(n, [0.0, 0.0])
                if z is not None:
                    cur[0] = max(cur[0], z)
                cur[1] = max(cur[1], s)
    return {n: (v[0], v[1]) for n, v in sorted(table.items())}


def fit_decay(table: Mapping[int, float], q: float) -> tuple[float, bool]:
    """Empirical constant max value(n)/q^n and whether the ratio is
    nonincreasing over the last half of the levels."""
    if not table:
        raise ValueError("empty table")
    levels = sorted(table)
    ratios = [table[n] / q**n for n in levels]
    tail = ratios[len(ratios) // 2:]
    monotone = all(b <= a for a, b in zip(tail, tail[1:]))
    return max(ratios), monotone
