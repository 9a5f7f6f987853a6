import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from exsteer import (
    ControlSignal,
    ConvergenceError,
    Grid,
    HeldSegment,
    KindMismatchError,
    Monotubular,
    Nonlinearity,
    ParameterError,
    RegistryError,
    Trajectory,
    TwoStream,
    apply_semigroup,
    available_nonlinearities,
    check_nonlinearity,
    duhamel_linear,
    eval_nonlinearity,
    get_nonlinearity,
    norm,
    register_nonlinearity,
    solve_mild,
    synthesize_linear_control,
)

from conftest import random_field


def test_registry_lists_builtins():
    assert {"zero", "sat_tanh", "bounded_mix"} <= set(available_nonlinearities())


def test_unknown_nonlinearity():
    with pytest.raises(RegistryError):
        get_nonlinearity("cubic")
    with pytest.raises(ParameterError):
        get_nonlinearity("sat_tanh", slope=2.0)


def test_zero_nonlinearity(grid, rng):
    f = get_nonlinearity("zero")
    assert eval_nonlinearity(f, 0.3, random_field(grid, rng)).sup_norm() == 0.0
    assert f.bound == 0.0 and f.is_zero


@pytest.mark.parametrize("gain", [0.1, 0.5, -0.3])
def test_sat_tanh(grid, rng, gain):
    f = get_nonlinearity("sat_tanh", gain=gain)
    x = random_field(grid, rng)
    np.testing.assert_array_equal(eval_nonlinearity(f, 0.0, x).values, gain * np.tanh(x.values))
    assert f.bound == f.lipschitz == abs(gain)


def test_bounded_mix_uses_control(grid, rng):
    f = get_nonlinearity("bounded_mix", gain=0.2)
    x, u = random_field(grid, rng, True), random_field(grid, rng, True)
    np.testing.assert_allclose(eval_nonlinearity(f, 0.0, x, u).values, 0.2 * np.sin(x.values + u.values))
    with pytest.raises(KindMismatchError):
        eval_nonlinearity(f, 0.0, x, random_field(grid, rng))


@pytest.mark.parametrize("name", ["zero", "sat_tanh", "bounded_mix"])
def test_spot_check_builtins(name, rng):
    assert check_nonlinearity(get_nonlinearity(name), rng) == (True, True)


def test_spot_check_catches_false_claims(rng):
    liar = Nonlinearity("liar", {}, 0.5, 0.5, lambda t, x, u: np.tanh(x))
    assert check_nonlinearity(liar, rng) == (False, False)


def test_register_custom():
    register_nonlinearity("clip", lambda level=1.0: Nonlinearity("clip", {"level": level}, level, 1.0,
                                                                 lambda t, x, u: np.clip(x, -level, level)))
    assert get_nonlinearity("clip", level=0.3).bound == 0.3


def test_norm_bound_for_pairs():
    f = get_nonlinearity("sat_tanh", gain=0.1)
    assert f.norm_bound(False) == 0.1
    assert f.norm_bound(True) == pytest.approx(0.1 * math.sqrt(2))


@pytest.mark.parametrize("pair", [False, True])
def test_free_evolution(grid, rng, pair):
    sys = TwoStream(0.3, 0.9, 1.0, 1.0) if pair else Monotubular(1.5, 1.0)
    xi = random_field(grid, rng, pair)
    traj = solve_mild(sys, xi, None, get_nonlinearity("zero"), 0.0, 0.6, 30)
    for t, x in zip(traj.times, traj.states):
        assert norm(x - apply_semigroup(sys, t, xi)) <= 5 * grid.spacing * norm(xi)
    assert traj.picard_iterations == 1


@pytest.mark.parametrize("pair", [False, True])
def test_linear_path_matches_double_loop(grid, rng, pair):
    sys = TwoStream(0.5, 0.5, 1.0, 1.0) if pair else Monotubular(1.0, 1.0)
    xi, eta = random_field(grid, rng, pair), random_field(grid, rng, pair)
    u = synthesize_linear_control(sys, xi, eta, T=0.7)
    fast = solve_mild(sys, xi, u, get_nonlinearity("zero"), 0.0, 0.7, 40).final
    slow = duhamel_linear(sys, xi, u, 0.0, 0.7, 40)
    assert (fast - slow).sup_norm() <= 1e-10


def test_held_control_constant_source(grid):
    # x_t = -x_theta - a x + b w with w = 1, x(0) = 0: for theta >= t, x = b (1 - e^{-at}) / a
    sys = Monotubular(2.0, 3.0)
    w = grid.sample(np.ones_like)
    u = ControlSignal(sys, grid, (HeldSegment(0.0, 0.25, w),))
    x = solve_mild(sys, grid.zeros(), u, get_nonlinearity("zero"), 0.0, 0.25, 64).final
    downstream = grid.nodes >= 0.25 + 2 * grid.spacing
    exact = 3 * (1 - math.exp(-0.5)) / 2
    np.testing.assert_allclose(x.values[downstream], exact, rtol=1e-4)


@pytest.mark.parametrize("name", ["sat_tanh", "bounded_mix"])
def test_picard_gap_ratio(grid, rng, name):
    sys = Monotubular(1.0, 1.0)
    f = get_nonlinearity(name, gain=0.1)
    xi = random_field(grid, rng)
    u = synthesize_linear_control(sys, xi, random_field(grid, rng), T=0.5)
    traj = solve_mild(sys, xi, u, f, 0.0, 1.0, 64)
    gaps = traj.picard_gaps
    assert gaps[-1] <= 1e-10
    for g0, g1 in zip(gaps[1:], gaps[2:]):
        assert g1 <= (f.lipschitz * 1.0 + 0.05) * g0


def test_picard_factorial_decay(grid):
    sys = Monotubular(1.0, 1.0)
    f = get_nonlinearity("sat_tanh", gain=0.1)
    xi = grid.sample(lambda t: 5 * np.sin(np.pi * t))
    gaps = solve_mild(sys, xi, None, f, 0.0, 1.0, 64).picard_gaps
    C = gaps[0]
    for k, g in enumerate(gaps):
        assert g <= C * 0.1**k / math.factorial(k) * 1.5


def test_picard_failure_reports_gap(grid, rng):
    f = get_nonlinearity("sat_tanh", gain=0.1)
    with pytest.raises(ConvergenceError) as info:
        solve_mild(Monotubular(1.0, 1.0), random_field(grid, rng), None, f, 0.0, 1.0, 16, max_picard=2, tol_picard=1e-15)
    assert info.value.iterations == 2 and info.value.gap > 0


def test_solve_mild_is_deterministic(grid, rng):
    sys = TwoStream(0.5, 1.5, 1.0, 0.5)
    xi = random_field(grid, rng, True)
    f = get_nonlinearity("bounded_mix", gain=0.1)
    a = solve_mild(sys, xi, None, f, 0.0, 0.5, 20)
    b = solve_mild(sys, xi, None, f, 0.0, 0.5, 20)
    np.testing.assert_array_equal(a.values(), b.values())


def test_bounded_along_trajectory(grid, rng):
    sys = Monotubular(1.0, 1.0)
    f = get_nonlinearity("sat_tanh", gain=0.3)
    xi = random_field(grid, rng)
    traj = solve_mild(sys, xi, None, f, 0.0, 1.0, 32)
    for t, x in zip(traj.times, traj.states):
        assert norm(x) <= norm(xi) + f.bound * t + 5 * grid.spacing


def test_solve_mild_validates(grid, mono):
    f = get_nonlinearity("zero")
    with pytest.raises(ParameterError):
        solve_mild(mono, grid.zeros(), None, f, 0.5, 0.5, 8)
    with pytest.raises(ParameterError):
        solve_mild(mono, grid.zeros(), None, f, 0.0, 0.5, 1)
    with pytest.raises(KindMismatchError):
        solve_mild(mono, grid.zeros(pair=True), None, f, 0.0, 0.5, 8)


def test_trajectory_concatenate(grid):
    a = Trajectory([0.0, 0.5], [grid.zeros(), grid.zeros()], 2, [1.0, 0.0])
    b = Trajectory([0.5, 1.0], [grid.zeros(), grid.zeros()], 3, [0.5])
    joined = Trajectory.concatenate([a, b])
    np.testing.assert_array_equal(joined.times, [0.0, 0.5, 1.0])
    assert joined.picard_iterations == 5 and len(joined) == 3
    with pytest.raises(ParameterError):
        Trajectory([0.0, 0.0], [grid.zeros(), grid.zeros()])
    with pytest.raises(KindMismatchError):
        Trajectory([0.0, 1.0], [grid.zeros(), grid.zeros(pair=True)])


@settings(max_examples=25, deadline=None)
@given(st.floats(0.01, 0.3), st.floats(0.2, 1.0), st.integers(0, 2**32 - 1))
def test_picard_contracts_for_random_gain(gain, span, seed):
    g = Grid(64)
    rng = np.random.default_rng(seed)
    f = get_nonlinearity("sat_tanh", gain=gain)
    traj = solve_mild(Monotubular(1.0, 1.0), random_field(g, rng), None, f, 0.0, span, 16)
    gaps = traj.picard_gaps
    for g0, g1 in zip(gaps[1:], gaps[2:]):
        if g0 > 1e-14:
            assert g1 <= (gain * span) * g0 * (1 + 1e-9) + 1e-15
