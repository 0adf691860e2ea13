"""Temperley-Lieb coefficient matrices.

A quadratic polynomial P = sum_ij a_ij X_i X_j is stored through its
coefficient matrix ``A``; the vector P lives in C^m (x) C^m with coordinate
``i*m + j`` holding ``a_ij``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateError, NotTemperleyLiebError, ShapeError, SingularityError
from .numerics import as_cmat, kron, opnorm, unitary_defect
from .qarith import q_from_trace

DEFAULT_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class TLData:
    m: int
    A: np.ndarray
    q: float
    p_vec: np.ndarray
    e_proj: np.ndarray
    standard_form: bool
    tol: float = DEFAULT_TOL
    scale: float = field(default=1.0)

    @property
    def v(self) -> np.ndarray:
        """P normalized to a unit vector."""
        return self.p_vec / np.linalg.norm(self.p_vec)

    def anti_diagonal(self) -> np.ndarray:
        """Coefficients a_i of a_i X_i X_{m-i+1} (0-based array)."""
        m = self.m
        return np.array([self.A[i, m - 1 - i] for i in range(m)])


def _is_standard(A: np.ndarray, tol: float) -> bool:
    m = A.shape[0]
    mask = np.fliplr(np.eye(m, dtype=bool))
    big = np.max(np.abs(A))
    if np.max(np.abs(A[~mask]), initial=0.0) > tol * big:
        return False
    a = np.array([A[i, m - 1 - i] for i in range(m)])
    return bool(np.all(np.abs(np.abs(a * a[::-1]) - 1.0) <= tol))


def _assemble(A: np.ndarray, q: float, tol: float, scale: float = 1.0) -> TLData:
    m = A.shape[0]
    p = A.reshape(m * m, 1).copy()
    e = (p @ p.conj().T) / float(np.vdot(p, p).real)
    return TLData(m=m, A=A, q=q, p_vec=p, e_proj=e,
                  standard_form=_is_standard(A, tol), tol=tol, scale=scale)


def tl_validate(A, tol: float = DEFAULT_TOL) -> TLData:
    """Validate a coefficient matrix and derive q, P and e.

    ``A`` may be given up to a positive scalar: A conj(A) only needs to be
    unitary up to a nonzero factor, and ``A`` is rescaled so that it becomes
    unitary (the ideal generated by P is unchanged). The rescaling factor is
    kept in ``scale``.
    """
    A = as_cmat(A)
    rows, cols = A.shape
    if rows != cols:
        raise ShapeError(f"coefficient matrix must be square, got {rows}x{cols}")
    if rows < 2:
        raise ShapeError("need at least two generators (m >= 2)")
    s = np.linalg.svd(A, compute_uv=False)
    if s[-1] <= 1e-10 * s[0]:
        raise SingularityError("coefficient matrix is singular")
    AA = A @ A.conj()
    c = float(np.sqrt(np.trace(AA.conj().T @ AA).real / rows))
    scale = 1.0 if abs(c - 1.0) <= tol else c ** -0.5
    if scale != 1.0:
        A = A * scale
        AA = A @ A.conj()
    defect = unitary_defect(AA)
    if defect > tol:
        raise NotTemperleyLiebError(f"A conj(A) is not unitary up to a scalar (defect {defect:.3e})")
    trace = float(np.trace(A.conj().T @ A).real)
    if trace < 2.0 - tol:
        raise NotTemperleyLiebError(f"Tr(A*A) = {trace} < 2")
    q = 1.0 if trace <= 2.0 else q_from_trace(trace)
    return _assemble(A, q, tol, scale)


def dagger(t: TLData) -> TLData:
    """Data of the polynomial with transposed coefficients."""
    return _assemble(t.A.T.copy(), t.q, t.tol, t.scale)


def tl_defect(t: TLData) -> tuple[float, float]:
    """Fit (e x 1)(1 x e)(e x 1) = lambda^-1 (e x 1) and return (lambda, residual)."""
    eye = np.eye(t.m)
    E1 = kron(t.e_proj, eye)
    E2 = kron(eye, t.e_proj)
    M = E1 @ E2 @ E1
    coef = np.vdot(E1, M) / np.vdot(E1, E1)
    if abs(coef) <= 1e-14:
        raise DegenerateError("(e x 1)(1 x e)(e x 1) vanishes")
    coef = coef.real
    return 1.0 / coef, opnorm(M - coef * E1)


def q_family(q: float) -> np.ndarray:
    """Coefficient matrix of q^(-1/2) X1X2 - q^(1/2) X2X1."""
    return np.array([[0.0, q ** -0.5], [-(q ** 0.5), 0.0]], dtype=np.complex128)


def anti_diagonal_matrix(a) -> np.ndarray:
    """Matrix with a[i] at (i, m-1-i), i.e. P = sum a_i X_i X_{m-i+1}."""
    a = np.asarray(a, dtype=np.complex128)
    return np.fliplr(np.diag(a))
