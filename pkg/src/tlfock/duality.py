"""The duality partial isometry on (F (x) F) + (F (x) F) and the counit index.

Components are labelled (c, n, k): outer summand c in {1, 2}, first-leg level
n, second-leg level k, with coordinates C^{d_n} (x) C^{d_k}. Every entry of the
2x2 operator preserves the total grade g = n + k + 2(c - 1), so the operator
splits into finite square blocks, one per grade.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .chain import Chain
from .errors import FormError, RangeError
from .fock import GradedOp, creation_left, creation_right, phi_symbol
from .numerics import kron, opnorm
from .qarith import phi, q_int
from .report import Check, Report
from .tlpoly import TLData

# outer entry (row, col) -> shift of (first-leg level, second-leg level)
ENTRY_SHIFTS = {(1, 1): (-1, 1), (1, 2): (1, 1), (2, 1): (-1, -1), (2, 2): (1, -1)}


@dataclass(frozen=True, eq=False)
class BiGradedOp:
    """Blocks keyed by outer entry and source bi-level (n, k)."""

    entries: Mapping[tuple[int, int], Mapping[tuple[int, int], np.ndarray]]
    dims: tuple[int, ...]
    grade_max: int
    conventions: dict[str, str] = field(default_factory=dict)

    def components(self, g: int) -> list[tuple[int, int, int]]:
        comps = [(1, n, g - n) for n in range(g + 1)]
        comps += [(2, n, g - 2 - n) for n in range(g - 1)]
        return comps

    def grade_matrix(self, g: int) -> np.ndarray:
        if not 0 <= g <= self.grade_max:
            raise RangeError(f"grade {g} outside 0..{self.grade_max}")
        comps = self.components(g)
        sizes = [self.dims[n] * self.dims[k] for _, n, k in comps]
        offs = np.concatenate([[0], np.cumsum(sizes)])
        index = {cmp: i for i, cmp in enumerate(comps)}
        M = np.zeros((offs[-1], offs[-1]), dtype=np.complex128)
        for (r, col), blocks in self.entries.items():
            dn, dk = ENTRY_SHIFTS[(r, col)]
            for (n, k), b in blocks.items():
                src = (col, n, k)
                tgt = (r, n + dn, k + dk)
                if src not in index or tgt not in index:
                    continue
                i, j = index[tgt], index[src]
                M[offs[i]:offs[i + 1], offs[j]:offs[j + 1]] += b
        return M

    def component_slice(self, g: int, comp: tuple[int, int, int]) -> slice:
        comps = self.components(g)
        sizes = [self.dims[n] * self.dims[k] for _, n, k in comps]
        i = comps.index(comp)
        start = int(sum(sizes[:i]))
        return slice(start, start + sizes[i])


def _bilevels(g_max: int, col: int):
    extra = 2 if col == 2 else 0
    for g in range(g_max + 1):
        for n in range(g - extra + 1):
            yield n, g - extra - n


def build_wtilde(c: Chain, grade_max: int | None = None) -> BiGradedOp:
    """Assemble the four entries from the embeddings i_R, i_L and the maps
    V_R: H_n -> H_{n+1} (x) H, V_L: H_n -> H (x) H_{n+1}."""
    t, m, q = c.t, c.m, c.t.q
    top = min(c.N, c.N_full)
    if top < 2:
        raise RangeError("need N_full >= 2")
    g_max = top if grade_max is None else grade_max
    if g_max > top:
        raise RangeError(f"grade {g_max} needs levels beyond N_full={c.N_full}")
    d = c.dims
    v = t.v
    eye_m = np.eye(m)
    two = q_int(2, q)

    def iR(n):  # H_n -> H_{n-1} (x) H
        return c.J(n)

    def iL(n):  # H_n -> H (x) H_{n-1}
        return c.K(n)

    def VR(n):  # H_n -> H_{n+1} (x) H
        scale = np.sqrt(two * phi(n + 1, q))
        return scale * (kron(c.J(n + 1).conj().T, eye_m) @ kron(np.eye(d[n]), v))

    def VL(n):  # H_n -> H (x) H_{n+1}
        scale = np.sqrt(two * phi(n + 1, q))
        return scale * (kron(eye_m, c.K(n + 1).conj().T) @ kron(v, np.eye(d[n])))

    entries: dict[tuple[int, int], dict[tuple[int, int], np.ndarray]] = {k: {} for k in ENTRY_SHIFTS}
    for n, k in _bilevels(g_max, 1):
        # (1 (x) i_L^*)(i_R (x) 1): (n, k) -> (n-1, k+1)
        if n >= 1:
            entries[(1, 1)][(n, k)] = kron(np.eye(d[n - 1]), iL(k + 1).conj().T) @ kron(iR(n), np.eye(d[k]))
        else:
            entries[(1, 1)][(n, k)] = np.zeros((0, d[n] * d[k]))
        # (1 (x) V_L^*)(i_R (x) 1): (n, k) -> (n-1, k-1)
        if n >= 1 and k >= 1:
            entries[(2, 1)][(n, k)] = kron(np.eye(d[n - 1]), VL(k - 1).conj().T) @ kron(iR(n), np.eye(d[k]))
    for n, k in _bilevels(g_max, 2):
        # (1 (x) i_L^*)(V_R (x) 1): (n, k) -> (n+1, k+1)
        entries[(1, 2)][(n, k)] = kron(np.eye(d[n + 1]), iL(k + 1).conj().T) @ kron(VR(n), np.eye(d[k]))
        # (1 (x) V_L^*)(V_R (x) 1): (n, k) -> (n+1, k-1)
        if k >= 1:
            entries[(2, 2)][(n, k)] = kron(np.eye(d[n + 1]), VL(k - 1).conj().T) @ kron(VR(n), np.eye(d[k]))
    conv = {
        "outer_order": "row/col 1 = first summand (F (x) F), 2 = second summand",
        "legs": "first leg carries i_R / V_R, second leg carries i_L / V_L",
        "phi_placement": "phi^(1/2) at the level after the first-leg creation and before the second-leg annihilation",
    }
    return BiGradedOp(entries, tuple(d[: top + 1]), g_max, conv)


def _tensor(a: GradedOp, b: GradedOp, n: int, k: int) -> np.ndarray:
    return kron(a.block(n), b.block(k))


def wtilde_standard(t: TLData, c: Chain, grade_max: int | None = None) -> BiGradedOp:
    """The closed formula in terms of R_i, L_i and phi, valid in standard form."""
    if not t.standard_form:
        raise FormError("closed formula requires the anti-diagonal standard form")
    m, q = t.m, t.q
    top = min(c.N, c.N_full)
    g_max = top if grade_max is None else grade_max
    if g_max > top:
        raise RangeError(f"grade {g_max} needs levels beyond N_full={c.N_full}")
    a = t.anti_diagonal()
    R = [creation_right(c, i) for i in range(1, m + 1)]
    L = [creation_left(c, i) for i in range(1, m + 1)]
    ph = phi_symbol(c.dims, q, 0.5)
    d = c.dims

    entries: dict[tuple[int, int], dict[tuple[int, int], np.ndarray]] = {k: {} for k in ENTRY_SHIFTS}
    for n, k in _bilevels(g_max, 1):
        if n == 0:  # R_i^* kills the vacuum, so both entries vanish
            entries[(1, 1)][(n, k)] = np.zeros((0, d[n] * d[k]))
            continue
        acc11 = np.zeros((d[n - 1] * d[k + 1], d[n] * d[k]), dtype=np.complex128)
        acc21 = np.zeros((d[n - 1] * d[k - 1] if k >= 1 else 0, d[n] * d[k]), dtype=np.complex128)
        for i in range(m):
            j = m - 1 - i
            acc11 += _tensor(R[i].H, L[i], n, k)
            if k >= 1:
                acc21 += np.conj(a[i]) * _tensor(R[i].H, L[j].H @ ph, n, k)
        entries[(1, 1)][(n, k)] = acc11
        if acc21.shape[0]:
            entries[(2, 1)][(n, k)] = acc21
    for n, k in _bilevels(g_max, 2):
        acc12 = np.zeros((d[n + 1] * d[k + 1], d[n] * d[k]), dtype=np.complex128)
        acc22 = np.zeros((d[n + 1] * d[k - 1] if k >= 1 else 0, d[n] * d[k]), dtype=np.complex128)
        for i in range(m):
            j = m - 1 - i
            acc12 += a[i] * _tensor(ph @ R[i], L[j], n, k)
            acc22 += a[i] * np.conj(a[j]) * _tensor(ph @ R[i], L[i].H @ ph, n, k)
        entries[(1, 2)][(n, k)] = acc12
        if acc22.shape[0]:
            entries[(2, 2)][(n, k)] = acc22
    conv = {"formula": "sum_i of R_i^* (x) L_i, a_i phi^(1/2) R_i (x) L_(m-i+1), "
                       "conj(a_i) R_i^* (x) L_(m-i+1)^* phi^(1/2), a_i conj(a_(m-i+1)) phi^(1/2) R_i (x) L_i^* phi^(1/2)"}
    return BiGradedOp(entries, tuple(d[: top + 1]), g_max, conv)


def defect_check(w: BiGradedOp, tol: float = 1e-8) -> Report:
    """Compare 1 - W*W and 1 - WW* with the vacuum projections e_0 (x) 1 and
    1 (x) e_0 on the first summand, grade by grade."""
    rep = Report("wtilde")
    src = tgt = second = piso = 0.0
    rows = []
    for g in range(w.grade_max + 1):
        M = w.grade_matrix(g)
        dim = M.shape[0]
        E_src = np.zeros((dim, dim))
        s = w.component_slice(g, (1, 0, g))
        E_src[s, s] = np.eye(s.stop - s.start)
        E_tgt = np.zeros((dim, dim))
        s = w.component_slice(g, (1, g, 0))
        E_tgt[s, s] = np.eye(s.stop - s.start)
        D_src = np.eye(dim) - M.conj().T @ M - E_src
        D_tgt = np.eye(dim) - M @ M.conj().T - E_tgt
        r_src, r_tgt = opnorm(D_src), opnorm(D_tgt)
        r_piso = opnorm(M @ M.conj().T @ M - M)
        # rows/cols belonging to the second summand
        off = sum(w.dims[n] * w.dims[g - n] for n in range(g + 1))
        r_second = max(opnorm(D_src[off:, off:]), opnorm(D_tgt[off:, off:]))
        src, tgt, piso, second = max(src, r_src), max(tgt, r_tgt), max(piso, r_piso), max(second, r_second)
        rows.append({"grade": g, "dim": dim, "source_defect": r_src, "target_defect": r_tgt,
                     "partial_isometry": r_piso})
    rep.add(Check("source_defect", src, tol, provenance="run tolerance"))
    rep.add(Check("target_defect", tgt, tol, provenance="run tolerance"))
    rep.add(Check("second_summand_defects", second, tol, provenance="run tolerance"))
    rep.add(Check("partial_isometry", piso, tol, provenance="run tolerance"))
    rep.tables["grades"] = rows
    rep.conventions.update(w.conventions)
    return rep


def compare_wtilde(a: BiGradedOp, b: BiGradedOp) -> float:
    g_max = min(a.grade_max, b.grade_max)
    return max(opnorm(a.grade_matrix(g) - b.grade_matrix(g)) for g in range(g_max + 1))


def _require_q_family(t: TLData) -> None:
    if t.m != 2 or not t.standard_form:
        raise FormError("counit index needs m = 2 in anti-diagonal form")
    a = t.anti_diagonal()
    if abs(abs(a[0]) ** 2 - 1.0 / t.q) > 1e-8 * max(1.0, 1.0 / t.q):
        raise FormError("counit index needs |a_1|^2 = 1/q (the q^(-1/2) X1X2 - q^(1/2) X2X1 family up to phases)")


@dataclass(frozen=True, eq=False)
class CounitOperator:
    """V_P as a matrix from (F_{<=M} + F_{<=M}) into (F_{<=M+1} + F_{<=M+1})."""

    matrix: np.ndarray
    M: int
    dims: tuple[int, ...]

    def offsets(self, top: int) -> tuple[np.ndarray, int]:
        """Offsets of levels 0..top in one summand, and the summand size."""
        sizes = [self.dims[n] for n in range(top + 1)]
        offs = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
        return offs, int(offs[-1])


def counit_operator(t: TLData, c: Chain, M: int) -> CounitOperator:
    """Apply the counit (s_1 -> 0, s_2 -> 1, phi -> q) to the second leg of the
    closed formula. The result is

        [[R_2^*,                 a_1 phi^(1/2) R_1],
         [conj(a_1) q^(1/2) R_1^*, a_2 conj(a_1) q^(1/2) phi^(1/2) R_2]].
    """
    _require_q_family(t)
    if M + 1 > c.N:
        raise RangeError(f"counit operator up to level {M} needs N >= {M + 1}")
    q = t.q
    a1, a2 = t.anti_diagonal()
    R = [creation_right(c, i) for i in (1, 2)]
    ph = phi_symbol(c.dims, q, 0.5)
    V11 = R[1].H
    V12 = a1 * (ph @ R[0])
    V21 = np.conj(a1) * np.sqrt(q) * R[0].H
    V22 = a2 * np.conj(a1) * np.sqrt(q) * (ph @ R[1])
    d = c.dims
    src_sizes = [d[n] for n in range(M + 1)]
    tgt_sizes = [d[n] for n in range(M + 2)]
    so = np.concatenate([[0], np.cumsum(src_sizes)]).astype(int)
    to = np.concatenate([[0], np.cumsum(tgt_sizes)]).astype(int)
    S, T = int(so[-1]), int(to[-1])
    mat = np.zeros((2 * T, 2 * S), dtype=np.complex128)
    for (r, col), op in {(0, 0): V11, (0, 1): V12, (1, 0): V21, (1, 1): V22}.items():
        for n in range(M + 1):
            tl = n + op.shift
            if tl < 0:
                continue
            b = op.block(n)
            mat[r * T + to[tl]: r * T + to[tl + 1], col * S + so[n]: col * S + so[n + 1]] = b
    return CounitOperator(mat, M, tuple(d[: M + 2]))


def _kernel_dim(mat: np.ndarray, zero_rel: float = 1e-8) -> tuple[int, float, float, float]:
    """Kernel dimension with the singular-value gap that separates it.

    The spectrum includes the implicit zeros of a wide matrix. Values below
    zero_rel times the largest count as zero; the gap is the smallest nonzero
    value over the largest zero one, both floored at machine precision.
    Returns (kernel dimension, gap, largest zero value, smallest nonzero value).
    """
    rows, cols = mat.shape
    s = np.linalg.svd(mat, compute_uv=False)
    spec = np.sort(np.concatenate([s, np.zeros(max(cols - rows, 0))]))
    top = spec[-1]
    floor = np.finfo(float).eps * top * max(rows, cols)
    k = int(np.count_nonzero(spec <= zero_rel * top))
    largest_zero = float(spec[k - 1]) if k else 0.0
    smallest_nonzero = float(spec[k])
    gap = smallest_nonzero / max(largest_zero, floor)
    return k, float(gap), largest_zero, smallest_nonzero


def counit_index(t: TLData, c: Chain, M: int | None = None, tol: float = 1e-8, gap_min: float = 1e3) -> Report:
    """Kernel dimensions and index of V_P^* for the m = 2 family."""
    _require_q_family(t)
    if M is None:
        M = c.N - 2
    if M < 1:
        raise RangeError("need N >= 3 for the counit index")
    big = counit_operator(t, c, M + 1)  # source <= M+1, target <= M+2
    d = c.dims
    so, S = big.offsets(M + 1)
    to, T = big.offsets(M + 2)
    src_cols = np.r_[np.arange(0, so[M + 1]), S + np.arange(0, so[M + 1])]
    tgt_rows_all = np.r_[np.arange(0, to[M + 2]), T + np.arange(0, to[M + 2])]
    V = big.matrix[np.ix_(tgt_rows_all, src_cols)]  # exact on source levels <= M
    # V^* restricted to target levels <= M lands in source levels <= M+1: exact
    tgt_rows = np.r_[np.arange(0, to[M + 1]), T + np.arange(0, to[M + 1])]
    all_src = np.r_[np.arange(0, S), S + np.arange(0, S)]
    Vstar = big.matrix[np.ix_(tgt_rows, all_src)].conj().T

    n_src = V.shape[1]
    E0 = np.zeros((n_src, n_src))
    E0[0, 0] = 1.0
    source_defect = opnorm(np.eye(n_src) - V.conj().T @ V - E0)
    co_defect = opnorm(Vstar.conj().T @ Vstar - np.eye(Vstar.shape[1]))

    kv, gap_v, z_v, nz_v = _kernel_dim(V)
    ks, gap_s, z_s, nz_s = _kernel_dim(Vstar)
    index = ks - kv
    _, _, vh = np.linalg.svd(V)
    vac_overlap = float(abs(vh[-1, 0])) if kv == 1 else 0.0

    rep = Report("index")
    rep.add(Check("co_defect", co_defect, tol, provenance="run tolerance"))
    rep.add(Check("source_defect", source_defect, tol, provenance="run tolerance"))
    rep.add(Check("dim_ker_V", float(kv), passed=kv == 1, provenance="expected 1"))
    rep.add(Check("dim_ker_Vstar", float(ks), passed=ks == 0, provenance="expected 0"))
    rep.add(Check("index_Vstar", float(index), passed=index == -1, provenance="expected -1"))
    min_gap = min(gap_v, gap_s)
    rep.add(Check("singular_value_gap", min_gap, passed=min_gap >= gap_min,
                  provenance=f"gap between zero and nonzero singular values must be >= {gap_min:g}"))
    rep.add(Check("kernel_is_vacuum", 1.0 - vac_overlap, tol, provenance="kernel of V_P spanned by e_0 of the first summand"))
    rep.constants.update({"q": t.q, "levels": M, "smallest_nonzero_sv_V": nz_v, "largest_zero_sv_V": z_v,
                          "smallest_sv_Vstar": nz_s})
    rep.conventions["counit"] = "second leg: s_1 -> 0, s_2 -> 1, phi -> q"
    return rep


K_TABLE_NOTE = "Z/(m-2)Z with Z/0Z read as Z"


@dataclass(frozen=True)
class KGroupStatement:
    m: int
    k0_description: str
    k1_description: str
    side: str  # "K-theory" or "K-homology"


def _cyclic(n: int) -> str:
    if n == 0:
        return "Z"
    if n == 1:
        return "0"
    return f"Z/{n}Z"


def k_groups(m: int) -> tuple[KGroupStatement, KGroupStatement]:
    """K-theory (K_0, K_1) and K-homology (K^0, K^1) of the Cuntz-Pimsner algebra."""
    if m < 2:
        raise RangeError("m must be at least 2")
    torsion = _cyclic(m - 2)
    free = "Z" if m == 2 else "0"
    return (KGroupStatement(m, torsion, free, "K-theory"),
            KGroupStatement(m, free, torsion, "K-homology"))
