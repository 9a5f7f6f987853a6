"""
Two coupled streams
===================

Two parallel flows exchange heat at rates h1, h2. Coupling and transport
commute, so the semigroup is a translation times a 2x2 matrix exponential.
"""

import numpy as np

import exsteer as ex

grid = ex.Grid(256)
pair = ex.TwoStream(h1=0.5, h2=0.5, b1=1.0, b2=1.0, eps=0.1)

print("exp(A1 ln 2) =\n", ex.coupling_exp(0.5, 0.5, np.log(2)))

# with unequal rates the mixing matrix is still row-stochastic, but it
# can stretch some vectors a little in L2
print("sup ||S(t)|| for h1=1, h2=2:", ex.semigroup_bound(ex.TwoStream(1.0, 2.0, 1.0, 1.0)))

# %%
# Gramian block for the symmetric case: eigenvalue m on (1, 1) and
# (1 - exp(-2m)) / 2 on (1, -1), with m = min(t, theta)
print(ex.gramian_multiplier(pair, 0.1, 0.5))

# %%
x1 = np.sin(np.pi * grid.nodes)
xi = ex.PairFunction(grid, np.stack([x1, np.zeros_like(x1)]))
eta = ex.PairFunction(grid, np.stack([np.sin(2 * np.pi * grid.nodes) ** 2, 0.5 * x1]))

u = ex.synthesize_linear_control(pair, xi, eta, tau=0.0, T=0.5)
final = ex.solve_mild(pair, xi, u, ex.get_nonlinearity("bounded_mix", gain=0.05), 0.0, 0.5, 128).final
target = ex.apply_semigroup(pair, 0.5, eta)
print("distance to L S(1/2) eta on [eps, 1 - eps]:", ex.partial_error(final, target, grid.snap_eps(0.1)))

# the remainder is the drift of f, which the linear control ignores:
# it is at most M K tau with M = 0.05 sqrt(2), K = 1, tau = 1/2
print("drift bound:", ex.get_nonlinearity("bounded_mix", gain=0.05).norm_bound(True) * 0.5)
