"""Decision thresholds for the change-point statistic.

Three routes:

* :func:`mc_threshold` -- empirical quantile of window maxima simulated under
  a stationary spec (works for the core statistic and for SupW);
* :func:`analytic_threshold` -- the plug-in rule ``C(N) = sigma f lambda / sqrt(N)``;
* :func:`limit_threshold` -- quantile of ``max_t sqrt(sum_i d_i^2(t) zeta_i^2)``
  where ``d_i^2(t)`` are the eigenvalues of the limit covariance ``D(t)``.

All values are in unsquared Frobenius-norm units.
"""

from __future__ import annotations

import json
import math
from collections.abc import Callable, Sequence
from dataclasses import asdict, dataclass
from typing import Any, Literal

import numpy as np
from numpy.typing import NDArray
from scipy.stats import norm

from .cpstat import QUAD_PANELS, cumulative_matrix, plan_moment
from .matlin import invert, sym_eigenvalues
from .model import DeterministicPlan, ModelSpec
from .montecarlo import Statistic, trial_maxima

Method = Literal["mc", "analytic", "limit"]


class NotStationaryError(ValueError):
    """Calibration spec contains a change-point."""


@dataclass(frozen=True)
class ThresholdEstimate:
    """A threshold value with provenance.

    For ``method="limit"`` the value is in ``sqrt(N)``-scaled units; use
    :meth:`at` to get the finite-sample threshold.
    """

    level: float
    value: float
    method: Method
    trials: int = 0
    stderr: float = 0.0
    ci_low: float = math.nan
    ci_high: float = math.nan
    N: int | None = None

    def __post_init__(self) -> None:
        if not 0 < self.level < 1:
            raise ValueError("level must lie in (0, 1)")
        if self.value < 0:
            raise ValueError("threshold must be nonnegative")

    def at(self, n: int) -> float:
        return self.value / math.sqrt(n) if self.method == "limit" else self.value

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def order_statistic_quantile(values: Sequence[float], level: float, band: float = 0.99
                             ) -> tuple[float, float, float, float]:
    """Empirical quantile with a distribution-free binomial interval.

    Returns ``(quantile, stderr, ci_low, ci_high)``: the quantile is the
    ``ceil(level * n)``-th smallest value; the interval brackets the order
    statistics ``n*level -+ z sqrt(n level (1-level))`` with ``z`` the
    two-sided ``band`` normal quantile; ``stderr`` is the interval half-width
    divided by ``z``.
    """
    x = np.sort(np.asarray(values, dtype=float))
    n = x.size
    k = min(n, max(1, math.ceil(level * n - 1e-9)))
    z = norm.ppf(0.5 + band / 2)
    half = z * math.sqrt(n * level * (1 - level))
    lo = min(n, max(1, math.floor(n * level - half)))
    hi = min(n, max(1, math.ceil(n * level + half)))
    stderr = (x[hi - 1] - x[lo - 1]) / (2 * z)
    return float(x[k - 1]), float(stderr), float(x[lo - 1]), float(x[hi - 1])


def mc_threshold(spec: ModelSpec, level: float = 0.95, trials: int = 2000, beta: float = 0.05,
                 alpha: float = 0.95, seed: int = 0, statistic: Statistic = "core",
                 workers: int = 1) -> ThresholdEstimate:
    """``level``-quantile of the window maximum over ``trials`` stationary samples."""
    if spec.coeffs.n_changes:
        raise NotStationaryError("calibration spec must have a single regime")
    if trials < 100:
        raise ValueError("at least 100 trials are needed for a quantile estimate")
    maxima, _ = trial_maxima(spec, seed, trials, statistic, beta, alpha, workers)
    q, se, lo, hi = order_statistic_quantile(maxima, level)
    return ThresholdEstimate(level, q, "mc", trials, se, lo, hi, spec.N)


def mc_quantiles(spec: ModelSpec, levels: Sequence[float], trials: int = 2000,
                 beta: float = 0.05, alpha: float = 0.95, seed: int = 0,
                 statistic: Statistic = "core", workers: int = 1) -> list[ThresholdEstimate]:
    """Several quantile levels from one set of simulated maxima."""
    if spec.coeffs.n_changes:
        raise NotStationaryError("calibration spec must have a single regime")
    maxima, _ = trial_maxima(spec, seed, trials, statistic, beta, alpha, workers)
    out = []
    for level in levels:
        q, se, lo, hi = order_statistic_quantile(maxima, level)
        out.append(ThresholdEstimate(level, q, "mc", trials, se, lo, hi, spec.N))
    return out


def analytic_threshold(N: int, lam: float, sigma_max: float, fmax: float) -> float:
    """``C(N) = sigma_max * fmax * lam / sqrt(N)``.

    ``sigma_max`` is the largest noise standard deviation and ``fmax`` the
    largest absolute predictor value, both already square-rooted.
    """
    if min(N, lam, sigma_max, fmax) <= 0:
        raise ValueError("all inputs to the analytic threshold must be positive")
    return sigma_max * fmax / math.sqrt(N) * lam


def plan_fmax(plan: DeterministicPlan, grid: int = 4097) -> float:
    """``max_i max_t |f_i(t)|`` on a dense grid of [0, 1]."""
    return float(np.max(np.abs(plan(np.linspace(0.0, 1.0, grid)))))


def back_solve_lambda(C: float, N: int, sigma_max: float, fmax: float) -> float:
    """Calibration parameter that makes :func:`analytic_threshold` equal ``C`` at ``N``."""
    return C * math.sqrt(N) / (sigma_max * fmax)


# ---------------------------------------------------------------------------
# limit law

@dataclass(frozen=True)
class LimitLawSpec:
    """Scalar-response setup: deterministic plan and noise scale ``g(t)``."""

    plan: DeterministicPlan
    g: Callable[[NDArray[np.float64]], NDArray[np.float64]] = lambda t: np.ones_like(t)

    @property
    def K(self) -> int:
        return self.plan.K


def _sigma_vector(spec: LimitLawSpec, t: float, panels: int) -> NDArray[np.float64]:
    # sigma_i^2(t) = (1/t) int_0^t f_i^2 g^2 ds
    def fn(s):
        F = spec.plan(s)
        g = np.broadcast_to(np.asarray(spec.g(s), dtype=float), s.shape)
        return F**2 * g**2
    return np.sqrt(np.maximum(cumulative_matrix(fn, t, panels) / t, 0.0))


def limit_corr_matrix(spec: LimitLawSpec, t: float, panels: int = QUAD_PANELS
                      ) -> NDArray[np.float64]:
    """Covariance ``D(t)`` of the Gaussian limit of ``sqrt(N) Z_N([N t])`` under no change."""
    if not 0 < t <= 1:
        raise ValueError("t must lie in (0, 1]")
    moment = plan_moment(spec.plan)
    full = cumulative_matrix(moment, 1.0, panels)
    inv = invert(full)
    at = cumulative_matrix(moment, t, panels)
    gt = _sigma_vector(spec, t, panels)[:, None]
    g1 = _sigma_vector(spec, 1.0, panels)[:, None]
    D = t * (gt @ gt.T - gt @ g1.T @ inv @ at - at @ inv @ g1 @ gt.T) + at @ inv @ g1 @ g1.T @ inv @ at
    return 0.5 * (D + D.T)


def limit_threshold(spec: LimitLawSpec, level: float = 0.95, grid: int = 64,
                    mc_draws: int = 20000, seed: int = 0) -> ThresholdEstimate:
    """Quantile of ``rho(zeta) = max_j sqrt(sum_i d_i^2(t_j) zeta_i^2)``.

    ``d_i^2(t_j)`` are the ascending eigenvalues of ``D(t_j)`` on the grid
    ``t_j = j/grid``; ``zeta`` is a standard Gaussian K-vector shared by all
    ``t``. The result is ``sqrt(N)``-scaled.
    """
    if grid < 64 or mc_draws < 1000:
        raise ValueError("need grid >= 64 and mc_draws >= 1000")
    ts = np.arange(1, grid + 1) / grid
    eig = np.array([np.maximum(sym_eigenvalues(limit_corr_matrix(spec, t)), 0.0) for t in ts])
    zeta = np.random.default_rng(np.random.SeedSequence([int(seed)])).standard_normal((mc_draws, spec.K))
    rho = np.sqrt(np.max((zeta**2) @ eig.T, axis=1))
    q, se, lo, hi = order_statistic_quantile(rho, level)
    return ThresholdEstimate(level, q, "limit", mc_draws, se, lo, hi)


# ---------------------------------------------------------------------------
# per-length thresholds for sub-sample scans

@dataclass(frozen=True)
class PerLengthThreshold:
    """``C(n)`` interpolated log-log between calibrated lengths.

    Outside the calibrated range the ``n^{-1/2}`` law is used from the
    nearest end point.
    """

    lengths: tuple[int, ...]
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.lengths) != len(self.values) or not self.lengths:
            raise ValueError("need matching, non-empty lengths and values")
        order = np.argsort(self.lengths)
        object.__setattr__(self, "lengths", tuple(int(self.lengths[i]) for i in order))
        object.__setattr__(self, "values", tuple(float(self.values[i]) for i in order))

    def __call__(self, n: int) -> float:
        L = np.asarray(self.lengths, dtype=float)
        V = np.asarray(self.values, dtype=float)
        if n <= L[0]:
            return float(V[0] * math.sqrt(L[0] / n))
        if n >= L[-1]:
            return float(V[-1] * math.sqrt(L[-1] / n))
        return float(np.exp(np.interp(math.log(n), np.log(L), np.log(np.maximum(V, 1e-300)))))

    @classmethod
    def from_mc(cls, spec: ModelSpec, lengths: Sequence[int], level: float = 0.95,
                trials: int = 2000, beta: float = 0.05, alpha: float = 0.95, seed: int = 0,
                workers: int = 1) -> PerLengthThreshold:
        vals = [mc_threshold(spec.with_N(n), level, trials, beta, alpha, seed + i, "core",
                             workers).value for i, n in enumerate(lengths)]
        return cls(tuple(lengths), tuple(vals))

    def to_dict(self) -> dict[str, Any]:
        return {"lengths": list(self.lengths), "values": list(self.values)}
