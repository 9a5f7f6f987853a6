"""
Transport, damping and the controllability Gramian
==================================================

A hot medium enters at theta = 0 and leaves at theta = 1. Everything the
inflow carries has left the pipe after one time unit.
"""

import numpy as np

import exsteer as ex

grid = ex.Grid(256)
pipe = ex.Monotubular(a=1.0, b=1.0)

# a smooth temperature profile, then where it sits after a quarter unit
x = grid.sample(lambda t: np.sin(np.pi * t))
later = ex.apply_semigroup(pipe, 0.25, x)
print("peak moved from", grid.nodes[np.argmax(x.values)], "to", grid.nodes[np.argmax(later.values)])
print("damped by", later.sup_norm() / x.sup_norm(), "~ exp(-1/4) =", np.exp(-0.25))

# after one unit the pipe has been flushed
print("||S(1) x|| =", ex.norm(ex.apply_semigroup(pipe, 1.0, x)))

# %%
# The Gramian acts pointwise. Its value at theta only depends on
# min(t, theta): the section near the inlet has seen little control.
for theta in (0.0, 0.05, 0.5, 0.95):
    print(f"theta={theta:4}: Q(0.3) multiplier = {ex.gramian_multiplier(pipe, 0.3, theta):.5f}")

# %%
# Near the inlet the Gramian is as small as we like, so Q(t) has no
# bounded inverse on the whole pipe.
for delta in (0.1, 0.05, 0.025, 0.0125):
    q = ex.noncoercivity_demo(pipe, 1.0, delta, grid, support="inflow")
    print(f"delta={delta:<7} Rayleigh quotient {q:.5f}")

# Away from the ends, on [eps, 1 - eps], it is coercive.
for t in (0.01, 0.05, 0.5, 1.0):
    r = ex.coercivity_report(pipe, t, 0.1, grid)
    print(f"t={t:<5} c_min={r.c_min:.5f}  t*||Q_L^-1||={r.product:.4f}  (sup over (0, T] is {r.condition_E_bound:.4f})")
