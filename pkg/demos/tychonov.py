# %% [markdown]
# # Tychonov's solution
#
# v(x, t) = sum_k f^(k)(t) x^(2k) / (2k)! with f(t) = exp(-1/t^2) solves the
# heat equation on the line, vanishes for t <= 0 and is nonzero afterwards.
# Every time derivative at t = 0 is zero, so the time-Taylor series at 0
# predicts v = 0 and misses the solution entirely.

# %%
import math

import numpy as np

from ancient_heat import analyticity_gap, growth_profile, tychonov_eval, tychonov_f_derivative
from ancient_heat import tychonov_poly, tychonov_residual

for k in range(4):
    print(k, tychonov_poly(k))

# %%
print([tychonov_f_derivative(k, 0.0) for k in range(8)])
print(tychonov_f_derivative(0, 0.5), math.exp(-4))
print([f"{abs(tychonov_f_derivative(k, 0.05)):.1e}" for k in range(0, 21, 4)])

# %%
for x in (0.0, 0.5, 1.0, 2.0):
    val = tychonov_eval(x, 0.5)
    print(f"x={x} v={val.value:.12g} tail={val.tail_estimate:.1e} terms={val.terms}")

# %%
print(tychonov_residual(0.3, 0.6, 1e-3), tychonov_residual(0.0, 0.5, 1e-4))
gap = analyticity_gap(1.0, 1.0)
print(gap.taylor_prediction, gap.actual, gap.gap)

# %% [markdown]
# The price is growth in x faster than any e^(c x^2): the best value of
# log|v| / x^2 over t keeps rising with x.

# %%
for x, best, arg in growth_profile([1.0, 2.0, 3.0, 4.0], np.arange(0.08, 1.0001, 0.02)):
    print(f"x={x} max log|v|={best:.3f} at t={arg:.2f}  ratio={best / x**2:.3f}")
