"""Dense complex linear algebra used by every other module.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. All singular
value work goes through LAPACK (``numpy.linalg.svd``).
"""
from __future__ import annotations

import numpy as np

from .errors import DimensionOverflowError, ShapeError

MAX_ENTRIES = 2**31


def as_cmat(a) -> np.ndarray:
    """Coerce ``a`` to a 2-D finite complex128 array."""
    out = np.asarray(a, dtype=np.complex128)
    if out.ndim == 0:
        out = out.reshape(1, 1)
    elif out.ndim == 1:
        out = out.reshape(-1, 1)
    elif out.ndim != 2:
        raise ShapeError(f"expected a matrix, got array of shape {out.shape}")
    if not np.all(np.isfinite(out)):
        raise ShapeError("matrix has non-finite entries")
    return out


def kron(a, b) -> np.ndarray:
    """Kronecker product with the left factor as the most significant index."""
    a = as_cmat(a)
    b = as_cmat(b)
    rows = a.shape[0] * b.shape[0]
    cols = a.shape[1] * b.shape[1]
    if rows * cols > MAX_ENTRIES:
        raise DimensionOverflowError(f"kron result {rows}x{cols} exceeds {MAX_ENTRIES} entries")
    return np.kron(a, b)


def opnorm(a) -> float:
    """Largest singular value (0 for empty matrices)."""
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(np.linalg.svd(a, compute_uv=False)[0])


def kernel_onb(a, tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis of the numerical null space of ``a``.

    A singular value counts as zero when it is at most ``tol`` times the
    largest singular value (or ``tol`` itself if ``a`` vanishes), so rescaling
    ``a`` does not change the answer.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    a = np.asarray(a, dtype=np.complex128)
    rows, cols = a.shape
    if rows == 0 or cols == 0:
        return np.eye(cols, dtype=np.complex128)
    _, s, vh = np.linalg.svd(a, full_matrices=True)
    scale = s[0] if s[0] > 0 else 1.0
    rank = int(np.count_nonzero(s > tol * scale))
    return vh[rank:].conj().T.copy()


def unitary_defect(u) -> float:
    """max(||u*u - I||, ||uu* - I||)."""
    u = np.asarray(u, dtype=np.complex128)
    r, c = u.shape
    left = u.conj().T @ u - np.eye(c)
    right = u @ u.conj().T - np.eye(r)
    return max(opnorm(left), opnorm(right))


def isometry_defect(u) -> float:
    """||u*u - I||, the one-sided version of :func:`unitary_defect`."""
    u = np.asarray(u, dtype=np.complex128)
    return opnorm(u.conj().T @ u - np.eye(u.shape[1]))


def basis_vector(dim: int, i: int) -> np.ndarray:
    e = np.zeros((dim, 1), dtype=np.complex128)
    e[i, 0] = 1.0
    return e
