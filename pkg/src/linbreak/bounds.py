"""Information lower bounds for change-point estimation error.

For any estimator, ``P{|theta_hat - theta| > eps} >= exp(-N * e) (1 - o(1))``
where the exponent ``e`` is the smaller of the two one-sided integrated
Kullback-Leibler divergences around the change. Divergence functions of
time are bundled in :class:`KlPair`; closed forms are provided for three
Gaussian settings.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.integrate import simpson

BOUND_PANELS = 1024

TimeFunction = Callable[[NDArray[np.float64]], ArrayLike]


class BoundError(ValueError):
    """Invalid arguments for a bound computation."""


class DegenerateVarianceError(BoundError):
    """A response variance vanishes somewhere on [0, 1]."""


def _as_function(f: TimeFunction | ArrayLike) -> TimeFunction:
    """Callables pass through; a dense grid on [0, 1] is linearly interpolated."""
    if callable(f):
        return f
    grid = np.asarray(f, dtype=float)
    knots = np.linspace(0.0, 1.0, grid.size)
    return lambda t: np.interp(t, knots, grid)


def _evaluate(f: TimeFunction, t: NDArray[np.float64]) -> NDArray[np.float64]:
    return np.broadcast_to(np.asarray(f(t), dtype=float), t.shape)


@dataclass(frozen=True)
class KlPair:
    """``J0(t) = E_0 ln f0/f1`` and ``J1(t) = E_1 ln f1/f0`` as functions of time."""

    J0: TimeFunction
    J1: TimeFunction

    def __post_init__(self) -> None:
        object.__setattr__(self, "J0", _as_function(self.J0))
        object.__setattr__(self, "J1", _as_function(self.J1))


def integrate(f: TimeFunction, a: float, b: float, panels: int = BOUND_PANELS) -> float:
    """Composite Simpson integral of ``f`` over ``[a, b]``."""
    if b <= a:
        return 0.0
    t = np.linspace(a, b, panels + 1)
    return float(simpson(_evaluate(f, t), x=t))


def theorem1_exponent(kl: KlPair, theta: float, eps: float) -> float:
    """``min(int_theta^{theta+eps} J0, int_{theta-eps}^theta J1)`` for one change."""
    if not 0 < eps < min(theta, 1 - theta):
        raise BoundError(f"need 0 < eps < min(theta, 1-theta); got eps={eps}, theta={theta}")
    return min(integrate(kl.J0, theta, theta + eps), integrate(kl.J1, theta - eps, theta))


def theorem2_exponent(kls: Sequence[KlPair], thetas: Sequence[float], eps: float) -> float:
    """Smallest single-change exponent over several separated changes.

    ``kls[i].J0`` is the divergence of regime ``i`` from regime ``i+1`` (used
    to the right of ``thetas[i]``) and ``kls[i].J1`` the reverse.
    """
    thetas = [float(t) for t in thetas]
    if len(kls) != len(thetas) or not thetas:
        raise BoundError("need one KlPair per change-point")
    edges = [0.0, *thetas, 1.0]
    delta = min(b - a for a, b in zip(edges, edges[1:]))
    if delta <= 0:
        raise BoundError("change-points must be strictly increasing inside (0, 1)")
    if not 0 < eps < delta:
        raise BoundError(f"eps={eps} must be below the minimum separation {delta}")
    return min(
        min(integrate(kl.J0, th, th + eps), integrate(kl.J1, th - eps, th))
        for kl, th in zip(kls, thetas)
    )


def lower_bound(exponent: float, N: int) -> float:
    """Leading-order error probability bound ``exp(-N * exponent)``."""
    return float(np.exp(-N * exponent))


def kl_gaussian_trend(phi0: TimeFunction, phi1: TimeFunction) -> KlPair:
    """Unit-variance Gaussian mean shift: ``J = (phi0 - phi1)^2 / 2`` on both sides."""
    def J(t):
        d = _evaluate(phi0, t) - _evaluate(phi1, t)
        return 0.5 * d * d
    return KlPair(J, J)


def kl_gaussian_regression(F: Callable[[NDArray[np.float64]], ArrayLike], a: ArrayLike,
                           b: ArrayLike, sigma: float) -> KlPair:
    """Deterministic predictors ``F(t)`` (K-vector), coefficients ``a -> b``, noise ``sigma``.

    ``J(t) = (sum_i f_i(t)(a_i - b_i))^2 / (2 sigma^2)``.
    """
    diff = np.asarray(a, dtype=float).ravel() - np.asarray(b, dtype=float).ravel()
    if sigma <= 0:
        raise BoundError("sigma must be positive")

    def J(t):
        vals = np.asarray(F(t), dtype=float)
        if vals.shape[0] != diff.size:
            raise BoundError(f"plan has {vals.shape[0]} functions but coefficients have {diff.size}")
        s = np.tensordot(diff, vals, axes=1)
        return s * s / (2.0 * sigma**2)
    return KlPair(J, J)


def _gaussian_kl_doubled(m0, s0, m1, s1):
    # twice KL(N(m0, s0^2) || N(m1, s1^2)), arranged as in the closed form
    r0 = m0 / s0
    r1 = m1 / s1
    ratio = s0 / s1
    return ((r0 - r1) ** 2 + 2 * r0 * r1 * (1 - ratio) + 2 * np.log(1 / ratio)
            + (1 + r0**2) * (ratio**2 - 1))


def kl_gaussian_stochastic(f: Sequence[TimeFunction], sigma: Sequence[TimeFunction],
                           a: ArrayLike, b: ArrayLike) -> KlPair:
    """Noise-free regression on independent Gaussian predictors ``x_i ~ N(f_i, sigma_i^2)``.

    The response is ``N(phi_j, Delta_j^2)`` with ``phi_j = sum c_i f_i`` and
    ``Delta_j^2 = sum c_i^2 sigma_i^2`` for ``c = a`` (j=0) or ``c = b`` (j=1);
    ``J0`` and ``J1`` are the two Gaussian divergences.
    """
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if not len(f) == len(sigma) == a.size == b.size:
        raise BoundError("f, sigma, a and b must have the same length")
    fs = [_as_function(g) for g in f]
    ss = [_as_function(g) for g in sigma]

    def moments(t):
        F = np.stack([_evaluate(g, t) for g in fs])
        S2 = np.stack([_evaluate(g, t) ** 2 for g in ss])
        d0 = np.sqrt(np.tensordot(a * a, S2, axes=1))
        d1 = np.sqrt(np.tensordot(b * b, S2, axes=1))
        if np.any(d0 <= 0) or np.any(d1 <= 0):
            raise DegenerateVarianceError("response variance must stay positive")
        return np.tensordot(a, F, axes=1), d0, np.tensordot(b, F, axes=1), d1

    def J0(t):
        p0, d0, p1, d1 = moments(np.asarray(t, dtype=float))
        return 0.5 * _gaussian_kl_doubled(p0, d0, p1, d1)

    def J1(t):
        p0, d0, p1, d1 = moments(np.asarray(t, dtype=float))
        return 0.5 * _gaussian_kl_doubled(p1, d1, p0, d0)

    return KlPair(J0, J1)
