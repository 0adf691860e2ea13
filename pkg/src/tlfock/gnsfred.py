"""Graded GNS model of (omega, omega^dagger), the isometry V and F = 2VV^* - 1.

The GNS space of the state is modeled on the span of Lambda(s_xi), xi in H_k,
whose gram matrix is g_k times the standard one, g_k = q^(-k)/[k+1]_q. The
dagger side is the same with the dagger chain. Total GNS degree D is the
direct sum over k of C^{d_k} (x) C^{d'_(D-k)}, components ordered by k.
Matrices returned here act in orthonormal coordinates (components rescaled by
sqrt(g_k g_j)) unless stated otherwise.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .chain import BRUTEFORCE_GUARD, Chain, sweedler_split
from .errors import AssumptionError, BudgetError, RangeError
from .fock import creation_left, creation_right
from .numerics import isometry_defect, kron, opnorm, unitary_defect
from .qarith import q_int
from .report import Check, Report


@dataclass(frozen=True)
class GnsGraded:
    side: str  # "P" or "P_dagger"
    q: float

    def gram(self, k: int) -> float:
        if k < 0:
            raise RangeError("negative degree")
        return self.q ** (-k) / q_int(k + 1, self.q)


def reversal_map(c: Chain, c_dag: Chain, j: int) -> np.ndarray:
    """(iota'_j)^* Rev_j iota_j: reverse the tensor factors of H_j into the dagger fiber."""
    if j > min(c.N_full, c_dag.N_full) or j < 0:
        raise RangeError(f"level {j} outside both chains")
    m = c.m
    iota = c.iota(j)
    if j <= 1:
        rev = iota
    else:
        d = iota.shape[1]
        axes = tuple(range(j - 1, -1, -1)) + (j,)
        rev = iota.reshape((m,) * j + (d,)).transpose(axes).reshape(m**j, d)
    return c_dag.iota(j).conj().T @ rev


def _weight(n: int, k: int, q: float) -> float:
    return q ** (n / 2) / np.sqrt(n + 1) * np.sqrt(q_int(k + 1, q) * q_int(n - k + 1, q))


@dataclass(frozen=True, eq=False)
class VBlocks:
    """V_n for n <= N_V, stored per GNS bidegree (k, n-k) in unscaled coordinates."""

    q: float
    N_V: int
    dims: tuple[int, ...]
    dims_dag: tuple[int, ...]
    components: dict[int, list[np.ndarray]]
    isometry_residuals: dict[int, float] = field(default_factory=dict)

    def scale(self, k: int, j: int) -> float:
        g = GnsGraded("P", self.q)
        return float(np.sqrt(g.gram(k) * g.gram(j)))

    def offsets(self, D: int) -> np.ndarray:
        sizes = [self.dims[k] * self.dims_dag[D - k] for k in range(D + 1)]
        return np.concatenate([[0], np.cumsum(sizes)]).astype(int)

    def orthonormal(self, n: int) -> np.ndarray:
        """V_n as a plain isometry into the orthonormal degree-n coordinates."""
        if not 0 <= n <= self.N_V:
            raise RangeError(f"level {n} outside 0..{self.N_V}")
        return np.vstack([self.scale(k, n - k) * blk for k, blk in enumerate(self.components[n])])


def build_V(c: Chain, c_dag: Chain, N_V: int) -> VBlocks:
    """V_n = sum_k w_{n,k} (1 (x) reversal_{n-k}) split(n, k)."""
    q = c.t.q
    if q >= 1.0:
        raise AssumptionError("the Fredholm module needs q < 1")
    if N_V > min(c.N_full, c_dag.N_full):
        raise RangeError(f"N_V={N_V} beyond the chains (N_full={c.N_full}, dagger {c_dag.N_full})")
    revs = [reversal_map(c, c_dag, j) for j in range(N_V + 1)]
    comps: dict[int, list[np.ndarray]] = {}
    residuals: dict[int, float] = {}
    for n in range(N_V + 1):
        blocks = []
        for k in range(n + 1):
            split = sweedler_split(c, n, k)
            blocks.append(_weight(n, k, q) * (kron(np.eye(c.dims[k]), revs[n - k]) @ split))
        comps[n] = blocks
    v = VBlocks(q, N_V, tuple(c.dims[: N_V + 1]), tuple(c_dag.dims[: N_V + 1]), comps)
    for n in range(N_V + 1):
        residuals[n] = isometry_defect(v.orthonormal(n))
    object.__setattr__(v, "isometry_residuals", residuals)
    return v


def _raise_first(v: VBlocks, left_blocks, D: int) -> np.ndarray:
    """pi(s_i (x) 1) from degree D to D+1 in orthonormal coordinates."""
    g = GnsGraded("P", v.q)
    src, tgt = v.offsets(D), v.offsets(D + 1)
    out = np.zeros((tgt[-1], src[-1]), dtype=np.complex128)
    for k in range(D + 1):
        j = D - k
        blk = np.sqrt(g.gram(k + 1) / g.gram(k)) * kron(left_blocks[k], np.eye(v.dims_dag[j]))
        out[tgt[k + 1]:tgt[k + 2], src[k]:src[k + 1]] = blk
    return out


def _raise_second(v: VBlocks, left_dag_blocks, D: int) -> np.ndarray:
    """pi(1 (x) t_i) from degree D to D+1 in orthonormal coordinates."""
    g = GnsGraded("P_dagger", v.q)
    src, tgt = v.offsets(D), v.offsets(D + 1)
    out = np.zeros((tgt[-1], src[-1]), dtype=np.complex128)
    for k in range(D + 1):
        j = D - k
        blk = np.sqrt(g.gram(j + 1) / g.gram(j)) * kron(np.eye(v.dims[k]), left_dag_blocks[j])
        out[tgt[k]:tgt[k + 1], src[k]:src[k + 1]] = blk
    return out


def _generators(v: VBlocks, c: Chain, c_dag: Chain, top: int):
    """Per generator: (Fock creation blocks, GNS raising maps by degree) for both sides."""
    out = []
    for i in range(1, c.m + 1):
        L = creation_left(c, i)
        Ld = creation_left(c_dag, i)
        R = creation_right(c, i)
        lb = [L.block(k) for k in range(top + 1)]
        ldb = [Ld.block(k) for k in range(top + 1)]
        out.append(("s", i, [L.block(n) for n in range(top + 1)],
                    [_raise_first(v, lb, D) for D in range(top + 1)]))
        out.append(("t", i, [R.block(n) for n in range(top + 1)],
                    [_raise_second(v, ldb, D) for D in range(top + 1)]))
    return out


def C2_constant(q: float, k_max: int = 400) -> float:
    """max_k |1 - ((1-q^{2k})/(1-q^{2k+2}))^{1/2}| / q^{2k}, in a cancellation-free form."""
    k = np.arange(1, k_max + 1, dtype=float)
    a = 1.0 - q ** (2 * k)
    b = 1.0 - q ** (2 * k + 2)
    ratio = (1.0 - q**2) / (b * (1.0 + np.sqrt(a / b)))
    return float(ratio.max())


def majorant(n: int, q: float, C1: float, C2: float) -> float:
    k = np.arange(1, n + 2, dtype=float)
    terms = 1.0 / (n + 1) ** 3 + C2**2 * q ** (4 * k) / (n + 1) + C1**2 * q ** (2 * k) / (n + 1)
    return float(np.sqrt(1.0 / (n + 2) + 3.0 * terms.sum()))


@dataclass(frozen=True)
class ProjectionEstimate:
    values: dict[tuple[int, int], float]
    C1_hat: float
    n_max: int


def _left_factor_adjoint(c: Chain, k: int, X: np.ndarray) -> np.ndarray:
    """(iota_{k+1}^* (x) 1) X for X with m^{n+1} rows, without forming the Kronecker product."""
    m = c.m
    T = X.reshape(m ** (k + 1), -1, X.shape[1])
    T = np.tensordot(c.iota(k + 1).conj(), T, axes=([0], [0]))
    return T.reshape(-1, X.shape[1])


def projection_defect(c: Chain, n: int, k: int) -> float:
    """||(f_{k+1} (x) 1_{n-k})(1 (x) f_n) - f_{n+1}||, computed exactly on the ranges.

    With isometries U = 1 (x) iota_n and V = iota_{k+1} (x) 1 the two
    projections are UU^* and VV^*, and f_{n+1} = iota iota^* lies under both, so
    the norm equals ||V^*U - (V^*iota)(iota^*U)||.
    """
    U = kron(np.eye(c.m), c.iota(n))
    iota = c.iota(n + 1)
    VU = _left_factor_adjoint(c, k, U)
    Vi = _left_factor_adjoint(c, k, iota)
    return opnorm(VU - Vi @ (iota.conj().T @ U))


def projection_defect_full(c: Chain, n: int, k: int) -> float:
    """The same norm from dense m^{n+1} x m^{n+1} projections (small n only)."""
    m = c.m
    if m ** (n + 1) > 4096:
        raise BudgetError("dense projection check limited to m^(n+1) <= 4096")
    left = kron(c.projection(k + 1), np.eye(m ** (n - k)))
    right = kron(np.eye(m), c.projection(n))
    return opnorm(left @ right - c.projection(n + 1))


def projection_estimate(c: Chain, n_max: int | None = None) -> ProjectionEstimate:
    """Table (n, k) -> ||(f_{k+1} (x) 1_{n-k})(1 (x) f_n) - f_{n+1}|| for 0 <= k < n <= n_max."""
    m, q = c.m, c.t.q
    if n_max is None:
        n_max = c.N_full - 1
        while m ** (n_max + 1) > BRUTEFORCE_GUARD:
            n_max -= 1
    if m ** (n_max + 1) > BRUTEFORCE_GUARD:
        raise BudgetError(f"m^(n+1) = {m ** (n_max + 1)} exceeds guard {BRUTEFORCE_GUARD}")
    if n_max + 1 > c.N_full:
        raise RangeError(f"projection estimate up to {n_max} needs N_full >= {n_max + 1}")
    values = {(n, k): projection_defect(c, n, k) for n in range(1, n_max + 1) for k in range(n)}
    C1 = max(val / q**k for (n, k), val in values.items())
    return ProjectionEstimate(values, float(C1), n_max)


def commutator_oracle(c: Chain, i: int, n: int) -> float:
    """Operator norm of the squared-norm identity for V L_i - pi(s_i (x) 1) V, in full tensor space.

    The component of first GNS degree k (1 <= k <= n+1) pairs the factor
    q^(-1/2) [k]^(1/2) / ((n+1)^(1/2) [k+1]^(1/2)) with (f_k (x) 1_{n+1-k}).
    """
    m, q = c.m, c.t.q
    e = np.zeros((m, 1))
    e[i - 1, 0] = 1.0
    x = kron(e, c.iota(n))  # xi_i (x) xi, xi in H_n, as m^{n+1} x d_n
    fx = c.projection(n + 1) @ x
    rows = [fx / np.sqrt(n + 2)]
    for k in range(1, n + 2):
        coef = q ** -0.5 * np.sqrt(q_int(k, q) / q_int(k + 1, q)) / np.sqrt(n + 1)
        fk = kron(c.projection(k), np.eye(m ** (n + 1 - k)))
        rows.append(fx / np.sqrt(n + 2) - coef * (fk @ x))
    return opnorm(np.vstack(rows))


def fred_commutator_decay(v: VBlocks, c: Chain, c_dag: Chain, C1: float | None = None) -> dict[str, list[dict]]:
    """Per side, rows {n, c_n, bound_n} with c_n maximized over generators."""
    q = v.q
    top = v.N_V - 1
    if top < 2:
        raise RangeError("need N_V >= 3")
    if C1 is None:
        C1 = projection_estimate(c).C1_hat
    C2 = C2_constant(q)
    gens = _generators(v, c, c_dag, top)
    tables: dict[str, list[dict]] = {"s": [], "t": []}
    for n in range(top + 1):
        Vn, Vn1 = v.orthonormal(n), v.orthonormal(n + 1)
        worst = {"s": 0.0, "t": 0.0}
        for side, _i, fock_blocks, raise_maps in gens:
            diff = Vn1 @ fock_blocks[n] - raise_maps[n] @ Vn
            worst[side] = max(worst[side], opnorm(diff))
        bound = majorant(n, q, C1, C2)
        for side in tables:
            tables[side].append({"n": n, "c_n": worst[side], "bound_n": bound})
    return tables


def compact_commutator_report(v: VBlocks, c: Chain, c_dag: Chain, tol: float = 1e-10) -> Report:
    """F_D = 2 V_D V_D^* - 1 per total degree and r_D = max_x ||pi(x) F_D - F_{D+1} pi(x)||."""
    top = v.N_V - 1
    gens = _generators(v, c, c_dag, top)
    F = {}
    sym = 0.0
    for D in range(v.N_V + 1):
        Vd = v.orthonormal(D)
        F[D] = 2 * Vd @ Vd.conj().T - np.eye(Vd.shape[0])
        sym = max(sym, unitary_defect(F[D]), opnorm(F[D] @ F[D] - np.eye(Vd.shape[0])))
    rows = []
    for D in range(top + 1):
        r = max(opnorm(raise_maps[D] @ F[D] - F[D + 1] @ raise_maps[D]) for _, _, _, raise_maps in gens)
        rows.append({"D": D, "r_D": r})
    rep = Report("fredholm_F")
    rep.add(Check("F_squared", sym, tol, provenance="2VV^*-1 is a symmetry"))
    r = [row["r_D"] for row in rows]
    tail = r[2:] if len(r) > 2 else r
    decreasing = all(b < a for a, b in zip(tail, tail[1:]))
    rep.add(Check("r_D_decreasing", None, passed=decreasing and r[-1] < r[min(2, len(r) - 1)] if len(r) > 3 else decreasing,
                  provenance="compactness proxy for [pi(x), F]", note="checked from D = 2 on"))
    rep.tables["r_D"] = rows
    return rep


def fredholm_report(c: Chain, c_dag: Chain, N_V: int, tol: float = 1e-10) -> Report:
    """All checks of the Fredholm-module suite in one report."""
    v = build_V(c, c_dag, N_V)
    est = projection_estimate(c)
    decay = fred_commutator_decay(v, c, c_dag, est.C1_hat)
    rep = compact_commutator_report(v, c, c_dag, tol)
    rep.suite = "fredholm"
    iso = max(v.isometry_residuals.values())
    rep.add(Check("gns_isometry", iso, tol, provenance="V is an isometry"))
    for side, rows in decay.items():
        slack = max(row["c_n"] - row["bound_n"] for row in rows)
        rep.add(Check(f"{side}.c_n_below_bound", slack, 0.0, provenance="proof majorant"))
        first, last = rows[1]["c_n"], rows[-1]["c_n"]
        rep.add(Check(f"{side}.decay", None, passed=last < first, note=f"c_1={first:.3e}, c_last={last:.3e}"))
        rep.tables[f"commutator_{side}"] = rows
    vals = est.values
    decreasing_k = all(vals[(n, k + 1)] < vals[(n, k)] for n in range(2, min(est.n_max, 5) + 1) for k in range(n - 1))
    rep.add(Check("projection_estimate_decreasing_in_k", None, passed=decreasing_k))
    rep.add(Check("C1_hat_finite", est.C1_hat, passed=bool(np.isfinite(est.C1_hat))))
    rep.tables["projection_estimate"] = [{"n": n, "k": k, "value": val, "ratio": val / v.q**k} for (n, k), val in vals.items()]
    rep.constants.update({"C1_hat": est.C1_hat, "C2": C2_constant(v.q), "q": v.q, "N_V": N_V})
    return rep
