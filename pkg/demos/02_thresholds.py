"""Three ways to set the decision threshold, side by side.

Run with ``python3 demos/02_thresholds.py``.
"""

# %%
import math

from linbreak import (LimitLawSpec, analytic_threshold, back_solve_lambda, limit_threshold,
                      mc_threshold)
from linbreak.calibrate import plan_fmax
from linbreak.scenarios import eq16_plan, eq16_spec

# %% Monte Carlo quantiles shrink roughly like N^{-1/2}.
mc = {N: mc_threshold(eq16_spec(N), 0.95, trials=500, seed=N).value for N in (250, 500, 1000)}
for N, v in mc.items():
    print(f"MC       N={N:5d}  C={v:.4f}  sqrt(N) C={v * math.sqrt(N):.3f}")

# %% The plug-in rule needs one constant; fit it at N=1000 and extrapolate.
fmax = plan_fmax(eq16_plan())
lam = back_solve_lambda(mc[1000], 1000, 1.0, fmax)
for N in mc:
    print(f"analytic N={N:5d}  C={analytic_threshold(N, lam, 1.0, fmax):.4f}  (lambda={lam:.3f})")

# %% The limit-law route uses the eigenvalues of the limiting covariance.
# It draws one Gaussian vector for all t, so it tends to sit below the MC value.
lim = limit_threshold(LimitLawSpec(eq16_plan()), 0.95, mc_draws=20000)
for N in mc:
    print(f"limit    N={N:5d}  C={lim.at(N):.4f}")
