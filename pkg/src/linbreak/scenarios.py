"""Ready-made specs for the simulation experiments.

* :func:`eq16_spec` -- ``y = c0 + c1 x + xi`` with a deterministic predictor
  and an intercept shift ``c0: 0 -> delta``;
* :func:`ar1_spec` -- same regression with an AR(1) predictor and a slope
  change ``c1: 1 -> c1_after``;
* :func:`ses_spec` -- a two-equation simultaneous system with lagged
  endogenous regressors and two structural changes.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from .model import (AR1Plan, DeterministicPlan, LaggedSystemPlan, ModelSpec, NoiseModel,
                    PiecewiseCoefficients, ses_to_reduced)

#: Deterministic predictor for the regression experiments: a fast, bounded
#: oscillation around a fixed offset, so an intercept step is never absorbed
#: by the slope. The offset sets the null-threshold scale.
EQ16_PREDICTOR = "2.2 + sin(20*pi*t)"


def eq16_plan(predictor: str = EQ16_PREDICTOR) -> DeterministicPlan:
    return DeterministicPlan(("1 + 0*t", predictor))


def eq16_spec(N: int, delta: float = 0.0, theta: float = 0.3, noise_std: float = 1.0,
              predictor: str = EQ16_PREDICTOR) -> ModelSpec:
    """Intercept shift ``(c0, c1) = (0, 1) -> (delta, 1)`` at ``[theta N]``."""
    before = np.array([[0.0, 1.0]])
    if delta == 0:
        coeffs = PiecewiseCoefficients.constant(before)
    else:
        coeffs = PiecewiseCoefficients.single_change(before, [[delta, 1.0]], theta)
    meta = {"scenario": "eq16", "delta": delta, "theta": theta if delta else None}
    return ModelSpec(eq16_plan(predictor), coeffs, NoiseModel.iid(noise_std), int(N), meta)


def ar1_spec(N: int, theta: float | None = None, c1_after: float = 1.3, rho: float = 0.3,
             noise_std: float = 1.0) -> ModelSpec:
    """AR(1) predictor; slope ``1 -> c1_after`` at ``[theta N]`` (no change if ``theta`` is None)."""
    before = np.array([[0.0, 1.0]])
    if theta is None:
        coeffs = PiecewiseCoefficients.constant(before)
    else:
        coeffs = PiecewiseCoefficients.single_change(before, [[0.0, c1_after]], theta)
    meta = {"scenario": "ar1", "theta": theta, "rho": rho}
    return ModelSpec(AR1Plan(rho), coeffs, NoiseModel.iid(noise_std), int(N), meta)


SES_REGIMES = (
    (0.1, 0.5, 0.3, 0.7, 0.2, 0.4, 0.6),
    (0.1, 0.5, 0.0, 0.7, 0.2, 0.4, 0.6),
    (0.1, 0.5, 0.0, 0.7, 0.2, 0.4, 0.9),
)
SES_THETAS = (0.3, 0.7)


def ses_structural(u: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    """``(B, Gamma)`` for the system with predetermined ``(1, y_{i-1}, z_{i-1}, x_i)``.

    ``u = (c0, c1, c2, c3, d0, d1, d2)`` in::

        y_i = c0 + c1 y_{i-1} + c2 z_{i-1} + c3 x_i + eps_i
        z_i = d0 + d1 y_i + d2 x_i + xi_i
    """
    c0, c1, c2, c3, d0, d1, d2 = u
    B = np.array([[1.0, 0.0], [-d1, 1.0]])
    Gamma = -np.array([[c0, c1, c2, c3], [d0, 0.0, 0.0, d2]])
    return B, Gamma


def ses_spec(N: int, changes: bool = True, regimes: Sequence[Sequence[float]] = SES_REGIMES,
             thetas: Sequence[float] = SES_THETAS, eps_ar: float = 0.3,
             exog_rho: float = 0.5) -> ModelSpec:
    """Reduced form of the simultaneous system; all innovations standard normal.

    The structural errors are ``(eps, xi)`` with ``eps`` AR(1); the reduced
    noise is ``B^{-1} (eps, xi)``, which requires ``d1`` to stay fixed.
    """
    used = list(regimes) if changes else [regimes[0]]
    B0, _ = ses_structural(used[0])
    if any(not np.allclose(ses_structural(u)[0], B0) for u in used):
        raise ValueError("the endogenous coupling d1 must not change")
    pis = tuple(ses_to_reduced(*ses_structural(u)) for u in used)
    ends = (*thetas, 1.0) if changes else (1.0,)
    coeffs = PiecewiseCoefficients(ends, pis)
    noise = NoiseModel((1.0, 1.0), (eps_ar, 0.0), np.linalg.inv(B0))
    meta = {"scenario": "ses", "thetas": list(thetas) if changes else []}
    return ModelSpec(LaggedSystemPlan(2, exog_rho), coeffs, noise, int(N), meta)
