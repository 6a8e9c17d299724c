"""Small dense matrix kernel.

Matrices are plain ``numpy`` float arrays. The routines here are written out
explicitly (pivoted elimination, cyclic Jacobi, Cholesky) because the
dimensions involved are tiny (K, M <= 16) and the failure modes need to be
reported in terms the rest of the package understands.
"""

from __future__ import annotations

import numpy as np
from numpy.typing import ArrayLike, NDArray


class MatrixError(ValueError):
    """Base class for kernel errors."""


class SingularMatrixError(MatrixError):
    """Raised when a pivot collapses during elimination."""


class NotSquareError(MatrixError):
    """Raised when a square matrix is required."""


def as_matrix(m: ArrayLike) -> NDArray[np.float64]:
    """Validate and return a finite 2-D float array."""
    a = np.array(m, dtype=float)
    if a.ndim == 1:
        a = a.reshape(1, -1)
    if a.ndim != 2:
        raise MatrixError(f"expected a 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise MatrixError("matrix entries must be finite")
    return a


def _square(m: ArrayLike) -> NDArray[np.float64]:
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise NotSquareError(f"matrix of shape {a.shape} is not square")
    return a


def frobenius_norm(m: ArrayLike) -> float:
    """Return ``sqrt(tr(m m^T))`` for any rectangular matrix."""
    a = np.asarray(m, dtype=float)
    return float(np.sqrt(np.sum(a * a)))


def invert(m: ArrayLike) -> NDArray[np.float64]:
    """Invert a square matrix by Gauss-Jordan elimination with partial pivoting.

    Raises
    ------
    SingularMatrixError
        If a pivot falls below ``1e-12`` times the largest initial entry.
    """
    a = _square(m)
    n = a.shape[0]
    scale = np.max(np.abs(a)) if a.size else 0.0
    if scale == 0.0:
        raise SingularMatrixError("zero matrix is singular")
    tol = 1e-12 * scale
    work = np.hstack([a, np.eye(n)])
    for col in range(n):
        pivot = col + int(np.argmax(np.abs(work[col:, col])))
        if abs(work[pivot, col]) < tol:
            raise SingularMatrixError(f"pivot {col} vanished (|p| < {tol:.3g})")
        if pivot != col:
            work[[col, pivot]] = work[[pivot, col]]
        work[col] /= work[col, col]
        others = np.arange(n) != col
        work[others] -= np.outer(work[others, col], work[col])
    return work[:, n:].copy()


def sym_eigenvalues(m: ArrayLike, max_sweeps: int = 100) -> NDArray[np.float64]:
    """Eigenvalues (ascending) of a symmetric matrix via cyclic Jacobi rotations.

    The input is symmetrized by averaging with its transpose first.
    """
    a = _square(m)
    a = 0.5 * (a + a.T)
    n = a.shape[0]
    if n == 1:
        return a[0].copy()
    stop = 1e-12 * max(frobenius_norm(a), np.finfo(float).tiny)
    offdiag = ~np.eye(n, dtype=bool)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(a[offdiag] ** 2))
        if off < stop:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-18 * (abs(a[p, p]) + abs(a[q, q])) or apq == 0.0:
                    # negligible coupling; rotating would overflow tau
                    a[p, q] = a[q, p] = 0.0
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(tau) / (abs(tau) + np.hypot(1.0, tau)) if tau != 0 else 1.0
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
    return np.sort(np.diag(a))


def cholesky(m: ArrayLike) -> NDArray[np.float64] | None:
    """Lower Cholesky factor, or ``None`` if a pivot is not safely positive."""
    a = _square(m)
    n = a.shape[0]
    tr = np.trace(a)
    if tr <= 0:
        return None
    tol = 1e-12 * tr / n
    low = np.zeros_like(a)
    for j in range(n):
        d = a[j, j] - low[j, :j] @ low[j, :j]
        if d <= tol:
            return None
        low[j, j] = np.sqrt(d)
        low[j + 1 :, j] = (a[j + 1 :, j] - low[j + 1 :, :j] @ low[j, :j]) / low[j, j]
    return low


def is_positive_definite(m: ArrayLike) -> bool:
    """True iff a Cholesky factorization succeeds with all pivots above tolerance."""
    return cholesky(m) is not None
