import numpy as np
import pytest

from exsteer import (
    ConvergenceError,
    Grid,
    Monotubular,
    ParameterError,
    TwoStream,
    apply_semigroup,
    dyadic_schedule,
    get_nonlinearity,
    norm,
    stage_error_bound,
    steer_semilinear,
    synthesize_linear_control,
    validate_target,
)

from conftest import bump


def test_schedule_unit_horizon():
    s = dyadic_schedule(1.0, 3)
    assert s.taus == (0.5, 0.25, 0.125)
    assert s.times == (0.5, 0.75, 0.875)
    assert s.start(1) == 0.0 and s.start(3) == 0.75


def test_schedule_gap():
    s = dyadic_schedule(1.0, 10)
    assert 1.0 - sum(s.taus) == pytest.approx(2.0**-10, abs=1e-16)


def test_schedule_single_stage():
    s = dyadic_schedule(2.0, 1)
    assert s.taus == (1.0,) and s.times == (1.0,)


@pytest.mark.parametrize("n", [0, -1, 2.5])
def test_schedule_rejects(n):
    with pytest.raises(ParameterError):
        dyadic_schedule(1.0, n)


def test_stage_bound_without_nonlinearity(grid, mono):
    eta = bump(grid)
    expected = norm(apply_semigroup(mono, 0.25, eta) - eta)
    assert stage_error_bound(mono, eta, get_nonlinearity("zero"), 0.25) == expected


def test_stage_bound_linear_in_tau(grid, mono):
    g = Grid(1024)
    eta = bump(g)
    f = get_nonlinearity("sat_tanh", gain=0.1)
    taus = [2.0**-n for n in range(1, 9)]
    bounds = [stage_error_bound(mono, eta, f, t) for t in taus]
    ratios = [b / t for b, t in zip(bounds, taus)]
    # ||S(tau) eta - eta|| <= tau ||A eta|| with A eta = -eta' - a eta
    a_eta = -np.gradient(eta.values, g.nodes) - eta.values
    generator_norm = float(np.sqrt(np.sum(g.weights * a_eta**2)))
    assert max(ratios) <= generator_norm + f.bound + 1e-2
    assert all(b1 <= b0 for b0, b1 in zip(bounds, bounds[1:]))


def test_validate_smooth_bump(mono):
    assert validate_target(mono, bump(Grid(512)))


def test_validate_constant_fails_at_boundary(mono):
    g = Grid(512)
    diag = validate_target(mono, g.sample(np.ones_like))
    assert not diag.passed
    assert any("eta(1)" in m for m in diag.messages)


def test_validate_step_fails_by_growth(mono):
    g = Grid(1024)
    step = g.sample(lambda t: ((t > 0.3) & (t < 0.6)).astype(float))
    diag = validate_target(mono, step)
    assert not diag.passed
    assert diag.growth == pytest.approx(np.sqrt(2), rel=0.05)


def test_validate_checks_inflow_too(mono):
    g = Grid(512)
    diag = validate_target(mono, g.sample(lambda t: np.cos(0.5 * np.pi * t)))
    assert not diag.passed and any("eta(0)" in m for m in diag.messages)


def test_zero_nonlinearity_stage_accuracy(mono):
    g = Grid(512)
    xi, eta = g.sample(lambda t: np.sin(np.pi * t)), bump(g)
    _, _, rep = steer_semilinear(mono, xi, eta, get_nonlinearity("zero"), n_stages=6, n_time_steps_per_stage=128)
    for s in rep.stages:
        assert s.err_vs_transported_target <= 10 * g.spacing * (norm(eta) + s.state_norm_before)


def test_single_stage_matches_linear_synthesis_bitwise(mono):
    g = Grid(256)
    xi, eta = g.sample(lambda t: np.sin(np.pi * t)), bump(g)
    u, _, _ = steer_semilinear(mono, xi, eta, get_nonlinearity("zero"), n_stages=1, n_time_steps_per_stage=64)
    ref = synthesize_linear_control(mono, xi, eta, 0.0, 0.5)
    np.testing.assert_array_equal(u.segments[0].steering_vector.values, ref.segments[0].steering_vector.values)


@pytest.mark.parametrize(
    "sys,f",
    [
        (Monotubular(1.0, 1.0), get_nonlinearity("sat_tanh", gain=0.1)),
        (TwoStream(0.5, 0.5, 1.0, 1.0), get_nonlinearity("bounded_mix", gain=0.1)),
    ],
    ids=["mono-sat_tanh", "pair-bounded_mix"],
)
def test_semilinear_run(sys, f):
    g = Grid(256)
    if sys.is_pair:
        from exsteer import PairFunction

        xi = PairFunction(g, np.stack([np.sin(np.pi * g.nodes), np.zeros(g.n_nodes)]))
        eta = PairFunction(g, np.stack([bump(g).values, bump(g, 0.4, 0.6, -0.5).values]))
    else:
        xi, eta = g.sample(lambda t: np.sin(np.pi * t)), bump(g)
    u, traj, rep = steer_semilinear(sys, xi, eta, f, n_stages=20, n_time_steps_per_stage=64)
    assert rep.stop_reason == "grid_floor"
    assert len(rep.stages) == 7  # tau_8 = 1/256 < 2 / 256
    slack = 10 * g.spacing * rep.C_run
    for s in rep.stages:
        assert s.err_vs_target <= s.bound + slack
    errs = [s.err_vs_target for s in rep.stages]
    assert errs[-1] < errs[0]
    energies = [s.stage_energy for s in rep.stages]
    assert all(e1 / e0 <= 0.75 for e0, e1 in zip(energies[-4:], energies[-3:]))
    for s in rep.stages[1:]:
        assert s.stage_energy <= rep.c_fit * s.tau * (1 + 1e-12)
    assert rep.total_energy <= rep.energy_bound
    assert traj.times[-1] == rep.stages[-1].t_n
    assert len(u.segments) == len(rep.stages)


def test_stop_tol_fires(mono):
    g = Grid(128)
    eta = bump(g)
    _, _, rep = steer_semilinear(mono, eta, eta, get_nonlinearity("zero"), n_stages=5, stop_tol=1.0)
    assert rep.stop_reason == "stop_tol" and len(rep.stages) == 1


def test_no_stage_possible():
    g = Grid(8)
    sys = Monotubular(1.0, 1.0, T=0.1, eps=0.25)
    with pytest.raises(ParameterError):
        steer_semilinear(sys, g.zeros(), g.zeros(), get_nonlinearity("zero"))


def test_convergence_error_names_stage(mono):
    g = Grid(64)
    xi = g.sample(lambda t: 3 * np.sin(np.pi * t))
    with pytest.raises(ConvergenceError) as info:
        steer_semilinear(mono, xi, bump(g), get_nonlinearity("sat_tanh", gain=0.1), max_picard=1, tol_picard=1e-14)
    assert info.value.stage == 1
    assert str(info.value).startswith("stage 1:")
