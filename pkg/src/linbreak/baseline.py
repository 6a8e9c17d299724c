"""Split-maximized Wald statistic (SupW) for a single break in a linear model.

For each admissible split ``m`` the pooled residual sum of squares ``S`` is
compared with the two-piece sum ``S1(m) + S2(N-m)``::

    W(m) = N * (S - S1(m) - S2(N-m)) / (S1(m) + S2(N-m))

All residual sums come from running (prefix and suffix) Gram and cross
moments, so a whole sample costs O(N K^2) instead of N separate refits.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .cpstat import search_window
from .matlin import SingularMatrixError, as_matrix, invert

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class OlsFit:
    coeffs: NDArray[np.float64]  # M x K
    rss: float
    n_obs: int


@dataclass(frozen=True)
class WaldResult:
    sup_w: float
    n0: int
    N: int
    skipped: tuple[int, ...] = ()

    @property
    def theta_hat(self) -> float:
        return self.n0 / self.N

    @property
    def degenerate(self) -> bool:
        return np.isinf(self.sup_w)


def ols_fit(X: ArrayLike, Y: ArrayLike) -> OlsFit:
    """Least-squares coefficients ``c`` minimizing ``sum ||Y_i - c X_i||^2``."""
    X = as_matrix(X)
    Y = as_matrix(Y)
    K, n = X.shape
    if n < K:
        raise SingularMatrixError(f"{n} observations cannot identify {K} coefficients")
    coeffs = (invert(X @ X.T) @ (X @ Y.T)).T
    r = Y - coeffs @ X
    return OlsFit(coeffs, float(np.sum(r * r)), n)


def _running_rss(X: NDArray[np.float64], Y: NDArray[np.float64]) -> NDArray[np.float64]:
    """RSS of the fit on columns ``1..m`` for every ``m`` (NaN where singular).

    Batched over leading axes: ``X`` is ``(..., K, N)``, ``Y`` is ``(..., M, N)``.
    """
    gram = np.cumsum(X[..., :, None, :] * X[..., None, :, :], axis=-1)
    cross = np.cumsum(X[..., :, None, :] * Y[..., None, :, :], axis=-1)
    syy = np.cumsum(np.sum(Y * Y, axis=-2), axis=-1)
    gram = np.moveaxis(gram, -1, -3)  # (..., N, K, K)
    cross = np.moveaxis(cross, -1, -3)  # (..., N, K, M)
    K = X.shape[-2]
    ok = np.arange(1, X.shape[-1] + 1) >= K
    ok = np.broadcast_to(ok, syy.shape).copy()
    eye = np.eye(K)
    safe = np.where(ok[..., None, None], gram, eye)
    # scale-relative conditioning guard; splits failing it are skipped
    det = np.linalg.det(safe)
    scale = np.prod(np.diagonal(safe, axis1=-2, axis2=-1), axis=-1)
    ok &= np.abs(det) > 1e-12 * np.abs(scale)
    safe = np.where(ok[..., None, None], gram, eye)
    coef = np.linalg.solve(safe, cross)
    explained = np.sum(cross * coef, axis=(-2, -1))
    rss = np.maximum(syy - explained, 0.0)
    return np.where(ok, rss, np.nan)


def wald_path(X: NDArray[np.float64], Y: NDArray[np.float64]
              ) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Per-split pooled RSS and split RSS sums, batched.

    Returns ``(S, split)`` where ``split[..., m-1] = S1(m) + S2(N-m)``.
    """
    left = _running_rss(X, Y)
    right = _running_rss(X[..., ::-1], Y[..., ::-1])[..., ::-1]
    split = np.full_like(left, np.nan)
    split[..., :-1] = left[..., :-1] + right[..., 1:]
    return left[..., -1], split


def _scale(Y: NDArray[np.float64]) -> NDArray[np.float64]:
    return np.sum(Y * Y, axis=(-2, -1))


def sup_wald_batch(X: NDArray[np.float64], Y: NDArray[np.float64], beta: float = 0.05,
                   alpha: float = 0.95) -> tuple[NDArray[np.float64], NDArray[np.intp]]:
    """Batched SupW values and 1-based maximizing splits."""
    N = X.shape[-1]
    K = X.shape[-2]
    lo, hi = search_window(N, beta, alpha)
    lo, hi = max(lo, K + 1), min(hi, N - K - 1)
    if hi < lo:
        raise ValueError(f"window leaves fewer than K+1={K + 1} observations on a side")
    S, split = wald_path(X, Y)
    seg = split[..., lo - 1:hi]
    tiny = 1e-10 * _scale(Y)[..., None]
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.where(seg <= tiny, np.inf, N * (S[..., None] - seg) / seg)
    w = np.where(np.isnan(w), -np.inf, w)
    j = np.argmax(w, axis=-1)
    return np.take_along_axis(w, j[..., None], axis=-1)[..., 0], lo + j


def sup_wald(X: ArrayLike, Y: ArrayLike, beta: float = 0.05, alpha: float = 0.95) -> WaldResult:
    """SupW over splits in ``[[beta N], [alpha N]]`` keeping ``K+1`` points per side.

    Splits with a singular piece are skipped and logged; a split with zero
    residual on both pieces yields ``sup_w = inf`` located at that split.
    """
    X = as_matrix(X)
    Y = as_matrix(Y)
    N, K = X.shape[1], X.shape[0]
    lo, hi = search_window(N, beta, alpha)
    lo, hi = max(lo, K + 1), min(hi, N - K - 1)
    _, split = wald_path(X, Y)
    skipped = tuple(int(m) for m in range(lo, hi + 1) if np.isnan(split[m - 1]))
    if skipped:
        log.info("sup_wald: skipped %d singular splits", len(skipped))
    if len(skipped) == hi - lo + 1:
        raise SingularMatrixError("every split in the window is singular")
    w, n0 = sup_wald_batch(X, Y, beta, alpha)
    return WaldResult(float(w), int(n0), N, skipped)
