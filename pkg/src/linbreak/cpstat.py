"""The projected cross-moment statistic and its profile over a search window.

For predictors ``X`` (K x N) and responses ``Y`` (M x N) the statistic at
``n`` is the K x M matrix::

    Z_N(n) = (1/N) * ( sum_{i<=n} X_i Y_i^T - P(1,n) P(1,N)^{-1} sum_{i<=N} X_i Y_i^T )

with ``P(1,n) = sum_{i<=n} X_i X_i^T``. It is the running sum of ``X_i``
times the full-sample least-squares residual, so it vanishes identically at
``n = N`` and is blind to any fixed linear relation between ``Y`` and ``X``.
The same formula serves grid-evaluated deterministic predictors and observed
stochastic ones.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.integrate import simpson

from .matlin import SingularMatrixError, as_matrix, invert
from .model import DeterministicPlan, WrongKindError, grid_index

QUAD_PANELS = 2048


class EmptyWindowError(ValueError):
    """The search window contains no admissible index."""


class BadRangeError(ValueError):
    """Index range outside ``1 <= n1 <= n2 <= N``."""


@dataclass(frozen=True)
class StatProfile:
    """Norms ``||Z_N(n)||_F`` for ``n`` in ``[window_lo, window_hi]`` (1-based)."""

    N: int
    window_lo: int
    window_hi: int
    values: NDArray[np.float64]
    argmax_index: int
    max_value: float

    @property
    def theta_hat(self) -> float:
        return self.argmax_index / self.N


def _check_range(N: int, n1: int, n2: int) -> None:
    if not 1 <= n1 <= n2 <= N:
        raise BadRangeError(f"need 1 <= n1 <= n2 <= N, got n1={n1}, n2={n2}, N={N}")


def partial_gram(X: ArrayLike, n1: int, n2: int) -> NDArray[np.float64]:
    """``sum_{i=n1..n2} X_i X_i^T`` (1-based, inclusive)."""
    X = as_matrix(X)
    _check_range(X.shape[1], n1, n2)
    blk = X[:, n1 - 1:n2]
    return blk @ blk.T


def cross_moment(X: ArrayLike, Y: ArrayLike, n1: int, n2: int) -> NDArray[np.float64]:
    """``sum_{i=n1..n2} X_i Y_i^T`` (K x M)."""
    X = as_matrix(X)
    Y = as_matrix(Y)
    if X.shape[1] != Y.shape[1]:
        raise ValueError("X and Y must have the same number of columns")
    _check_range(X.shape[1], n1, n2)
    return X[:, n1 - 1:n2] @ Y[:, n1 - 1:n2].T


def z_statistic(X: ArrayLike, Y: ArrayLike, n: int) -> NDArray[np.float64]:
    """The K x M statistic at a single index ``n``, computed literally."""
    X = as_matrix(X)
    Y = as_matrix(Y)
    N = X.shape[1]
    _check_range(N, 1, n)
    full = cross_moment(X, Y, 1, N)
    inv = invert(partial_gram(X, 1, N))
    if n == N:
        return np.zeros_like(full)
    return (cross_moment(X, Y, 1, n) - partial_gram(X, 1, n) @ inv @ full) / N


def search_window(N: int, beta: float, alpha: float) -> tuple[int, int]:
    """Index window ``[max(1,[beta N]), [alpha N]]``."""
    if not 0 <= beta < alpha <= 1:
        raise ValueError(f"need 0 <= beta < alpha <= 1, got beta={beta}, alpha={alpha}")
    lo = max(1, grid_index(beta, N))
    hi = min(N, grid_index(alpha, N))
    if hi < lo:
        raise EmptyWindowError(f"window [{lo}, {hi}] is empty for N={N}")
    return lo, hi


def norm_path(X: NDArray[np.float64], Y: NDArray[np.float64]) -> NDArray[np.float64]:
    """``||Z_N(n)||_F`` for every ``n = 1..N``, batched over leading axes.

    ``X`` has shape ``(..., K, N)`` and ``Y`` shape ``(..., M, N)``. Uses the
    residual form ``Z_N(n) = N^{-1} sum_{i<=n} X_i r_i^T`` with ``r`` the
    full-sample least-squares residual, accumulated left to right.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    N = X.shape[-1]
    gram = X @ np.swapaxes(X, -1, -2)
    cross = X @ np.swapaxes(Y, -1, -2)
    if X.ndim == 2:
        coef = invert(gram) @ cross
    else:
        try:
            coef = np.linalg.solve(gram, cross)
        except np.linalg.LinAlgError as exc:
            raise SingularMatrixError(str(exc)) from exc
    fitted = np.swapaxes(coef, -1, -2) @ X
    resid = Y - fitted
    # contributions below round-off of the individual terms are treated as exact zeros
    floor = 1e-12 * (np.abs(Y) + np.abs(fitted))
    resid = np.where(np.abs(resid) <= floor, 0.0, resid)
    terms = X[..., :, None, :] * resid[..., None, :, :]  # (..., K, M, N)
    run = np.cumsum(terms, axis=-1)
    out = np.sqrt(np.sum(run * run, axis=(-3, -2))) / N
    out[..., -1] = 0.0
    return out


def profile(X: ArrayLike, Y: ArrayLike, beta: float = 0.05, alpha: float = 0.95) -> StatProfile:
    """Statistic norms over the window ``[[beta N], [alpha N]]`` and their argmax.

    Ties resolve to the smallest index.
    """
    X = as_matrix(X)
    Y = as_matrix(Y)
    if X.shape[1] != Y.shape[1]:
        raise ValueError("X and Y must have the same number of columns")
    N = X.shape[1]
    lo, hi = search_window(N, beta, alpha)
    values = norm_path(X, Y)[lo - 1:hi]
    j = int(np.argmax(values))
    return StatProfile(N, lo, hi, values, lo + j, float(values[j]))


def profile_max(X: NDArray[np.float64], Y: NDArray[np.float64], beta: float = 0.05,
                alpha: float = 0.95) -> tuple[NDArray[np.float64], NDArray[np.intp]]:
    """Batched window maxima and 1-based argmax indices for stacked samples."""
    N = X.shape[-1]
    lo, hi = search_window(N, beta, alpha)
    values = norm_path(X, Y)[..., lo - 1:hi]
    j = np.argmax(values, axis=-1)
    return np.take_along_axis(values, j[..., None], axis=-1)[..., 0], lo + j


# ---------------------------------------------------------------------------
# limit means

def cumulative_matrix(fn: Callable[[NDArray[np.float64]], NDArray[np.float64]], t: float,
                      panels: int = QUAD_PANELS) -> NDArray[np.float64]:
    """``int_0^t fn(s) ds`` for a matrix-valued ``fn`` by composite Simpson."""
    if t == 0:
        return np.zeros_like(np.asarray(fn(np.zeros(1)))[..., 0])
    s = np.linspace(0.0, t, panels + 1)
    vals = np.asarray(fn(s))
    return simpson(vals, x=s, axis=-1)


def plan_moment(plan: DeterministicPlan) -> Callable[[NDArray[np.float64]], NDArray[np.float64]]:
    """``s -> F(s) F(s)^T`` with the time axis last."""
    def fn(s: NDArray[np.float64]) -> NDArray[np.float64]:
        F = plan(s)
        return F[:, None, :] * F[None, :, :]
    return fn


def _limit_mean(moment, a: ArrayLike, b: ArrayLike, theta: float, t: float) -> NDArray[np.float64]:
    if not 0 < theta < 1 or not 0 <= t <= 1:
        raise ValueError("need 0 < theta < 1 and 0 <= t <= 1")
    diff = (as_matrix(a) - as_matrix(b)).T  # K x M
    full = cumulative_matrix(moment, 1.0)
    inv = invert(full)
    at = cumulative_matrix(moment, t)
    ath = cumulative_matrix(moment, theta)
    if t <= theta:
        return at @ inv @ (full - ath) @ diff
    return (full - at) @ inv @ ath @ diff


def limit_mean_deterministic(plan: DeterministicPlan, a: ArrayLike, b: ArrayLike, theta: float,
                             t: float) -> NDArray[np.float64]:
    """Large-sample mean of ``Z_N([N t])`` for one change from ``a`` to ``b`` at ``theta``.

    ``a`` and ``b`` are the M x K coefficient matrices before and after.
    """
    if not isinstance(plan, DeterministicPlan):
        raise WrongKindError("limit_mean_deterministic needs a deterministic plan")
    return _limit_mean(plan_moment(plan), a, b, theta, t)


def limit_mean_stochastic(V: Callable[[NDArray[np.float64]], ArrayLike], a: ArrayLike,
                          b: ArrayLike, theta: float, t: float) -> NDArray[np.float64]:
    """As :func:`limit_mean_deterministic` with ``E X X^T = V(n/N)`` in place of ``F F^T``.

    ``V`` maps a time array of shape ``(S,)`` to an array ``(K, K, S)``.
    """
    return _limit_mean(lambda s: np.asarray(V(s), dtype=float), a, b, theta, t)
