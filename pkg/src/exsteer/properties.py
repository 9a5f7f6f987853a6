"""Randomised property checks across all modules.

:func:`run_property_suite` is what ``exsteer selftest`` executes. Each
check returns a :class:`PropertyResult` with the worst measured
discrepancy next to the tolerance it was held to.
"""

import math
import time
from dataclasses import dataclass, replace

import numpy as np

from .grid import Grid, GridFunction, PairFunction, embed, inner_product, norm, project, restrict
from .gramian import (
    _blocks,
    apply_gramian,
    apply_partial_gramian,
    apply_partial_gramian_inverse,
    gramian_oracle,
    two_stream_uv,
)
from .dyadic import dyadic_schedule
from .semigroup import (
    Monotubular,
    TwoStream,
    apply_semigroup,
    coupling_exp,
    semigroup_bound,
    translate_left,
)
from .semilinear import (
    available_nonlinearities,
    check_nonlinearity,
    duhamel_linear,
    get_nonlinearity,
    solve_mild,
)
from .steering import control_energy, synthesize_linear_control

__all__ = ["PropertyResult", "random_state", "random_system", "run_property_suite"]


@dataclass(frozen=True)
class PropertyResult:
    name: str
    passed: bool
    worst: float
    tolerance: float
    cases: int

    def as_row(self):
        return {
            "check": self.name,
            "pass": self.passed,
            "worst": self.worst,
            "tolerance": self.tolerance,
            "cases": self.cases,
        }


def random_state(grid, rng, pair=False, n_modes=6):
    """Random sine series vanishing at both ends (scalar or pair)."""
    theta = grid.nodes
    k = np.arange(1, n_modes + 1)

    def one():
        coef = rng.normal(size=n_modes) / k
        return coef @ np.sin(np.pi * np.outer(k, theta))

    if pair:
        return PairFunction(grid, np.stack([one(), one()]))
    return GridFunction(grid, one())


def random_system(rng, pair=False, special=False, T=1.0, eps=0.1):
    if not pair:
        return Monotubular(rng.uniform(0.2, 3.0), rng.choice([-1, 1]) * rng.uniform(0.3, 2.0), T, eps)
    if special:
        return TwoStream(0.5, 0.5, 1.0, 1.0, T, eps)
    return TwoStream(
        rng.uniform(0.1, 2.0), rng.uniform(0.1, 2.0), rng.uniform(0.3, 2.0), rng.uniform(0.3, 2.0), T, eps
    )


def _aligned(grid, rng, lo=0.0, hi=1.0):
    k = rng.integers(int(lo * grid.n_cells), int(hi * grid.n_cells) + 1)
    return k / grid.n_cells


def _result(name, worst, tol, cases):
    return PropertyResult(name, bool(worst <= tol), float(worst), float(tol), cases)


def _check_quadrature(grid, rng, cases):
    worst = 0.0
    for _ in range(cases):
        c = rng.normal(size=3)
        x = grid.sample(lambda t: c[0] + c[1] * t + c[2] * t**2)
        exact = c[0] + c[1] / 2 + c[2] / 3
        approx = inner_product(x, grid.sample(np.ones_like))
        worst = max(worst, abs(approx - exact) / (abs(c[2]) + 1e-300))
    return _result("trapezoid error on quadratics", worst, grid.spacing**2 / 6 * (1 + 1e-6), cases)


def _check_projection(grid, rng, cases):
    worst = 0.0
    for _ in range(cases):
        pair = bool(rng.integers(2))
        x, y = random_state(grid, rng, pair), random_state(grid, rng, pair)
        eps = _aligned(grid, rng, 0.02, 0.45)
        px = project(x, eps)
        worst = max(
            worst,
            (project(px, eps) - px).sup_norm(),
            abs(inner_product(px, y) - inner_product(x, project(y, eps))),
            (embed(restrict(x, eps)) - px).sup_norm(),
            (restrict(embed(restrict(x, eps)), eps) - restrict(x, eps)).sup_norm(),
        )
    return _result("projection idempotent, self-adjoint, restrict/embed", worst, 1e-12, cases)


def _systems(rng):
    pair = bool(rng.integers(2))
    return random_system(rng, pair), pair


def _check_semigroup_law(grid, rng, cases):
    worst = 0.0
    for _ in range(cases):
        sys, pair = _systems(rng)
        x = random_state(grid, rng, pair)
        t, s = _aligned(grid, rng, 0, 0.6), _aligned(grid, rng, 0, 0.6)
        lhs = apply_semigroup(sys, t, apply_semigroup(sys, s, x))
        worst = max(worst, norm(lhs - apply_semigroup(sys, t + s, x)) / norm(x))
    return _result("semigroup law S(t)S(s) = S(t+s)", worst, 1e-12, cases)


def _check_adjoint(grid, rng, cases):
    worst = 0.0
    for _ in range(cases):
        sys, pair = _systems(rng)
        x, y = random_state(grid, rng, pair), random_state(grid, rng, pair)
        t = rng.uniform(0, 1.2)
        lhs = inner_product(apply_semigroup(sys, t, x), y)
        rhs = inner_product(x, apply_semigroup(sys, t, y, "adjoint"))
        worst = max(worst, abs(lhs - rhs) / (norm(x) * norm(y)))
    return _result("adjoint duality <S x, y> = <x, S* y>", worst, 2 * grid.spacing, cases)


def _check_nilpotent(grid, rng, cases):
    worst = 0.0
    for _ in range(cases):
        sys, pair = _systems(rng)
        x = random_state(grid, rng, pair)
        t = rng.uniform(1.0, 3.0)
        worst = max(worst, apply_semigroup(sys, t, x).sup_norm(), apply_semigroup(sys, t, x, "adjoint").sup_norm())
    return _result("nilpotency S(t) = 0 for t >= 1", worst, 0.0, cases)


def _check_contraction(grid, rng, cases):
    worst = -math.inf
    for _ in range(cases):
        sys, pair = _systems(rng)
        x = random_state(grid, rng, pair)
        t = rng.uniform(0, 1)
        K = semigroup_bound(sys)
        slack = K**2 * grid.spacing * x.sup_norm() ** 2
        excess = norm(apply_semigroup(sys, t, x)) ** 2 - (K**2 * norm(x) ** 2 + slack)
        worst = max(worst, excess)
    return _result("||S(t) x|| <= K ||x||", max(worst, 0.0), 0.0, cases)


def _check_coupling(grid, rng, cases):
    worst = 0.0
    for _ in range(cases):
        h1, h2, t = rng.uniform(0.05, 3), rng.uniform(0.05, 3), rng.uniform(0, 5)
        E = coupling_exp(h1, h2, t)
        worst = max(worst, np.max(np.abs(E.sum(axis=1) - 1.0)), max(0.0, -E.min()))
        x = random_state(grid, rng, True)
        sys = TwoStream(h1, h2, 1.0, 1.0)
        s = rng.uniform(0, 1)
        shifted_then_mixed = PairFunction(grid, E @ translate_left(x, s).values)
        mixed_then_shifted = translate_left(PairFunction(grid, E @ x.values), s)
        worst = max(worst, (shifted_then_mixed - mixed_then_shifted).sup_norm())
        worst = max(worst, (apply_semigroup(sys, 0.0, x) - x).sup_norm())
    return _result("coupling row sums, positivity, commutation", worst, 1e-12, cases)


def _check_gramian_oracle(grid, rng, cases, n_steps):
    worst = 0.0
    ds = 0.0
    for i in range(cases):
        pair = i % 2 == 1
        sys = random_system(rng, pair, special=pair)
        x = random_state(grid, rng, pair)
        t = rng.uniform(0.05, 1.0)
        ref = gramian_oracle(sys, t, x, n_steps)
        rel = norm(apply_gramian(sys, t, x) - ref) / norm(ref)
        ds = t / n_steps
        worst = max(worst, rel / (5 * (grid.spacing + ds)))
    return _result("Gramian closed form vs semigroup quadrature (scaled)", worst, 1.0, cases)


def _check_gramian_algebra(grid, rng, cases):
    worst = 0.0
    for _ in range(cases):
        sys, pair = _systems(rng)
        x, y = random_state(grid, rng, pair), random_state(grid, rng, pair)
        t = rng.uniform(0.01, 1.5)
        qx, qy = apply_gramian(sys, t, x), apply_gramian(sys, t, y)
        scale = norm(x) * norm(y)
        worst = max(worst, abs(inner_product(qx, y) - inner_product(x, qy)) / scale)
        worst = max(worst, max(0.0, -inner_product(qx, x)))
        s = rng.uniform(0.01, t)
        worst = max(worst, max(0.0, inner_product(apply_gramian(sys, s, x), x) - inner_product(qx, x)))
    return _result("Gramian symmetric, nonnegative, monotone in t", worst, 1e-12, cases)


def _check_two_stream_closed_form(grid, rng, cases):
    worst = 0.0
    sys = TwoStream(0.5, 0.5, 1.0, 1.0)
    for _ in range(cases):
        t = rng.uniform(0, 2)
        theta = rng.uniform(0, 1, 16)
        u, v = two_stream_uv(t, theta)
        blocks = _blocks(sys, np.minimum(t, theta))
        worst = max(worst, np.max(np.abs(blocks[:, 0, 0] - u / 4)), np.max(np.abs(blocks[:, 0, 1] - v / 4)))
        worst = max(worst, np.max(np.abs(blocks[:, 0, 0] - blocks[:, 1, 1])))
    return _result("two-stream symmetric case (1/4)[[u, v], [v, u]]", worst, 1e-13, cases)


def _check_partial_inverse(grid, rng, cases):
    worst = 0.0
    for _ in range(cases):
        sys, pair = _systems(rng)
        eps = _aligned(grid, rng, 0.05, 0.3)
        w = restrict(random_state(grid, rng, pair), eps)
        t = rng.uniform(0.02, 1.0)
        v = apply_partial_gramian_inverse(sys, t, eps, w)
        worst = max(worst, norm(apply_partial_gramian(sys, t, v) - w) / norm(w))
    return _result("partial Gramian inverse round trip", worst, 1e-10, cases)


def _check_energy_identity(grid, rng, cases):
    worst = 0.0
    for _ in range(cases):
        sys, pair = _systems(rng)
        sys = replace(sys, eps=0.1)
        xi, eta = random_state(grid, rng, pair), random_state(grid, rng, pair)
        u = synthesize_linear_control(sys, xi, eta, T=0.5)
        seg = u.segments[0]
        measured = control_energy(u, grid.n_cells // 2)
        worst = max(worst, abs(measured - seg.identity_energy) / seg.identity_energy)
    return _result("minimum-norm energy identity", worst, 1e-4, cases)


def _check_picard(grid, rng, cases):
    worst_ratio, worst_match = 0.0, 0.0
    n_steps = 32
    for i in range(cases):
        sys, pair = _systems(rng)
        xi = random_state(grid, rng, pair)
        u = synthesize_linear_control(sys, xi, random_state(grid, rng, pair), T=0.5)
        name = ("sat_tanh", "bounded_mix")[i % 2]
        f = get_nonlinearity(name, gain=0.1)
        traj = solve_mild(sys, xi, u, f, 0.0, 0.5, n_steps)
        gaps = traj.picard_gaps
        for g0, g1 in zip(gaps, gaps[1:]):
            if g0 > 1e-13:
                worst_ratio = max(worst_ratio, g1 / g0 - (f.lipschitz * 0.5 + 0.05))
        lin = solve_mild(sys, xi, u, get_nonlinearity("zero"), 0.0, 0.5, n_steps).final
        ref = duhamel_linear(sys, xi, u, 0.0, 0.5, n_steps)
        worst_match = max(worst_match, (lin - ref).sup_norm())
    return [
        _result("Picard gap ratio <= L T + 0.05", max(worst_ratio, 0.0), 0.0, cases),
        _result("zero nonlinearity matches double-loop Duhamel", worst_match, 1e-10, cases),
    ]


def _check_nonlinearities(rng):
    out = []
    for name in available_nonlinearities():
        ok = check_nonlinearity(get_nonlinearity(name), rng)
        out.append(PropertyResult(f"nonlinearity {name} bound and Lipschitz", all(ok), 0.0, 0.0, 1000))
    return out


def _check_schedule(rng, cases):
    worst = 0.0
    for _ in range(cases):
        T, n = rng.uniform(0.1, 3), int(rng.integers(1, 30))
        sch = dyadic_schedule(T, n)
        worst = max(worst, abs(sum(sch.taus) - sch.times[-1]), abs(sch.times[-1] - T * (1 - 2.0**-n)))
    return _result("dyadic schedule telescopes", worst, 1e-14, cases)


def run_property_suite(n_cells=256, seed=0, cases=20):
    """Run every property check; returns ``(results, seconds)``."""
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    grid = Grid(n_cells)
    results = [
        _check_quadrature(grid, rng, cases),
        _check_projection(grid, rng, cases),
        _check_semigroup_law(grid, rng, cases),
        _check_adjoint(grid, rng, cases),
        _check_nilpotent(grid, rng, cases),
        _check_contraction(grid, rng, cases),
        _check_coupling(grid, rng, cases),
        _check_gramian_oracle(grid, rng, max(4, cases // 4), 2 * n_cells),
        _check_gramian_algebra(grid, rng, cases),
        _check_two_stream_closed_form(grid, rng, cases),
        _check_partial_inverse(grid, rng, cases),
        _check_energy_identity(grid, rng, max(2, cases // 10)),
        *_check_picard(grid, rng, max(2, cases // 10)),
        *_check_nonlinearities(rng),
        _check_schedule(rng, cases),
    ]
    return results, time.perf_counter() - start
