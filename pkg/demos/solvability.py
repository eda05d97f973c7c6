# %% [markdown]
# # When can the backward problem be solved?
#
# The backward heat problem with data a has a solution for all t >= 0
# exactly when the iterated Laplacians a_j = Delta^j a grow at most
# exponentially in j. On a finite graph this always holds for a large
# enough rate, so the interesting output is the fitted rate A4_hat.

# %%
import math

import numpy as np

from ancient_heat import GrowthBound, build_lattice, build_ladder, check_solvability, estimate_growth
from ancient_heat import laplacian, path_graph
from ancient_heat.domain import hop_distance, spectral_radius_bound

op = laplacian(path_graph(2))
lad = build_ladder(op, [1.0, -1.0], 32)
est = estimate_growth(lad)
print(est.A4_hat, math.log(2), est.A3_hat)

# %% [markdown]
# A cap below ln 2 fails at the first step; the cap (1, ln 2) holds with
# zero margin.

# %%
for A4 in (0.5, math.log(2), 1.0):
    v = check_solvability(lad, GrowthBound(1.0, A4))
    print(f"A4={A4:.4f} holds={v.holds} first_violation={v.first_violation_j} margin={v.margin:.3g}")

# %% [markdown]
# On a lattice, random data picks up the top of the spectrum. The fitted
# rate approaches ln |lambda_min| from below as J grows.

# %%
g = build_lattice((8, 8))
op = laplacian(g)
lam = np.linalg.eigvalsh(op.matrix.toarray())
a = np.random.default_rng(0).standard_normal(g.n)
for J in (8, 32, 128):
    lad = build_ladder(op, a, J, normalize=True)
    print(J, estimate_growth(lad, j_min=J // 2).A4_hat, math.log(-lam.min()), math.log(spectral_radius_bound(op)))

# %% [markdown]
# A spatial weight mu discounts far vertices: |a_j(x)| e^(-mu d(x, 0)).

# %%
d = hop_distance(g)
lad = build_ladder(op, np.eye(g.n)[-1], 24, normalize=True)
for mu in (0.0, 0.5, 1.0):
    e = estimate_growth(lad, d, mu=mu)
    print(mu, e.A3_hat, e.A4_hat)
