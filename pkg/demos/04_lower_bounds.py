"""Information lower bounds next to what the estimator actually achieves.

Run with ``python3 demos/04_lower_bounds.py``.
"""

# %%
import math

import numpy as np

from linbreak import kl_gaussian_regression, kl_gaussian_stochastic, lower_bound, theorem1_exponent
from linbreak.montecarlo import trial_maxima
from linbreak.scenarios import eq16_plan, eq16_spec

# %% Intercept shift 0 -> 0.4 with unit noise: J = 0.4^2 / 2 on both sides.
kl = kl_gaussian_regression(eq16_plan(), [0.0, 1.0], [0.4, 1.0], sigma=1.0)
eps = 0.05
e = theorem1_exponent(kl, 0.3, eps)
print(f"exponent = {e:.5f}")

for N in (300, 500, 1000):
    _, where = trial_maxima(eq16_spec(N, 0.4, 0.3), seed=N, trials=500)
    p = np.mean(np.abs(where / N - 0.3) > eps)
    print(f"N={N:5d}  P(|theta_hat - theta| > {eps}) = {p:.3f}   bound exp(-N e) = "
          f"{lower_bound(e, N):.4f}")

# %% Random Gaussian predictors with no noise: information comes from the variance change.
kl = kl_gaussian_stochastic([lambda t: np.ones_like(t), lambda t: np.zeros_like(t)],
                            [lambda t: np.full_like(t, 0.5), lambda t: np.ones_like(t)],
                            a=[1.0, 1.0], b=[1.0, 2.0])
t = np.array([0.5])
print(f"J0 = {kl.J0(t)[0]:.4f}, J1 = {kl.J1(t)[0]:.4f} (asymmetric); "
      f"exponent at eps=0.1: {theorem1_exponent(kl, 0.5, 0.1):.4f}; "
      f"N for bound 1e-3: {math.ceil(math.log(1e3) / theorem1_exponent(kl, 0.5, 0.1))}")
