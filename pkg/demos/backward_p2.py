# %% [markdown]
# # Backward heat flow on the two-vertex path
#
# On P2 the Laplacian has eigenvalues 0 and -2, so every solution is
# explicit. This makes it a good place to watch the time-Taylor series
# run backward and to see what the ill-posedness costs.

# %%
import math

import numpy as np

from ancient_heat import evaluate_series, laplacian, path_graph, roundtrip_error, solve_backward
from ancient_heat.domain import spectral_radius_bound

op = laplacian(path_graph(2))
print(op.matrix.toarray())

# %% [markdown]
# Start from a = (1, 0). Going back one unit of time should give
# ((1 + e^2)/2, (1 - e^2)/2).

# %%
u, rep = evaluate_series(op, [1.0, 0.0], -1.0, tol=1e-12)
print(u, [(1 + math.e**2) / 2, (1 - math.e**2) / 2])
print(rep.to_dict())

# %% [markdown]
# For long times the series is split into steps of length at most
# 8 / rho, and each step is re-expanded.

# %%
for t in (-1.0, -5.0, -30.0):
    u, rep = evaluate_series(op, [1.0, 0.0], t, tol=1e-6)
    exact = (1 + math.exp(-2 * t)) / 2
    print(f"t={t:6.1f} splits={rep.splits:2d} J={rep.J_used:3d} rel.err={abs(u[0] - exact) / exact:.2e}")

# %% [markdown]
# Round trip: solve backward over tau, then evolve forward exactly. The
# mismatch tracks the amplification factor e^(tau rho) on a longer path.

# %%
op10 = laplacian(path_graph(10))
rho = spectral_radius_bound(op10)
a = np.sin(np.arange(10.0))
for x in (1.0, 5.0, 10.0, 20.0):
    err, cond = roundtrip_error(op10, a, x / rho, tol=1e-13)
    print(f"tau*rho={x:5.1f}  e^(tau rho)={cond:9.3e}  roundtrip err={err:.2e}")

# %% [markdown]
# The backward solution itself never grows faster than e^(t rho).

# %%
for t in (0.5, 1.0, 2.0):
    u = solve_backward(op10, a, t)
    print(t, np.abs(u).max(), np.abs(a).max() * math.exp(t * rho))
