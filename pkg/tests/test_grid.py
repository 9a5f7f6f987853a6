import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from exsteer import (
    Grid,
    GridFunction,
    GridMismatchError,
    PairFunction,
    ParameterError,
    RestrictedFunction,
    embed,
    inner_product,
    norm,
    project,
    restrict,
)

from conftest import random_field


def test_weights_sum_to_one(grid):
    one = grid.sample(np.ones_like)
    assert inner_product(one, one) == pytest.approx(1.0, abs=1e-15)


def test_linear_integrand_is_exact(grid):
    theta = grid.sample(lambda t: t)
    assert inner_product(theta, grid.sample(np.ones_like)) == pytest.approx(0.5, abs=1e-15)


@pytest.mark.parametrize("n", [64, 256, 1024])
def test_sine_norm_second_order(n):
    g = Grid(n)
    x = g.sample(lambda t: np.sin(np.pi * t))
    assert abs(norm(x) ** 2 - 0.5) <= g.spacing**2


def test_restrict_constant():
    g = Grid(64)
    w = restrict(g.sample(np.ones_like), 0.25)
    assert w.nodes[0] == 0.25 and w.nodes[-1] == 0.75
    assert np.all(w.values == 1.0)
    assert len(w.values) == 33


def test_restrict_samples_nodes():
    g = Grid(64)
    w = restrict(g.sample(lambda t: t), 0.25)
    np.testing.assert_array_equal(w.values, w.nodes)


def test_embed_indicator():
    g = Grid(64)
    x = embed(restrict(g.sample(np.ones_like), 0.25))
    inside = (g.nodes >= 0.25) & (g.nodes <= 0.75)
    np.testing.assert_array_equal(x.values, inside.astype(float))


def test_restrict_embed_identity_bitwise(grid, rng):
    for pair in (False, True):
        w = restrict(random_field(grid, rng, pair), 0.125)
        assert restrict(embed(w), 0.125) == w


def test_embed_restrict_is_projection(grid, rng):
    x = random_field(grid, rng)
    assert embed(restrict(x, 0.25)) == project(x, 0.25)


def test_embed_adjoint_up_to_edges(grid, rng):
    x = random_field(grid, rng)
    w = restrict(random_field(grid, rng), 0.25)
    lhs, rhs = inner_product(embed(w), x), inner_product(w, restrict(x, 0.25))
    assert abs(lhs - rhs) <= grid.spacing * w.sup_norm() * x.sup_norm()


def test_projection_idempotent_and_contractive(grid, rng):
    eps = grid.snap_eps(0.1)
    for _ in range(50):
        x = random_field(grid, rng)
        p = project(x, eps)
        assert project(p, eps) == p
        assert norm(p) <= norm(x) + 1e-15


def test_projection_self_adjoint(grid, rng):
    eps = grid.snap_eps(0.2)
    for _ in range(20):
        x, y = random_field(grid, rng), random_field(grid, rng)
        diff = inner_product(project(x, eps), y) - inner_product(x, project(y, eps))
        assert abs(diff) <= 1e-12 * norm(x) * norm(y)


def test_pair_inner_product_is_sum_of_components(grid, rng):
    x, y = random_field(grid, rng, True), random_field(grid, rng, True)
    parts = inner_product(x.x1, y.x1) + inner_product(x.x2, y.x2)
    assert inner_product(x, y) == parts


@pytest.mark.parametrize("eps", [0.0, 0.5, 0.7, -0.1])
def test_eps_out_of_range(grid, eps):
    with pytest.raises(ParameterError):
        grid.snap_eps(eps)


def test_eps_snaps_to_node():
    g = Grid(1024)
    assert g.snap_eps(0.1) == 102 / 1024
    with pytest.raises(ParameterError):
        g.eps_index(0.1)


def test_grid_mismatch():
    a, b = Grid(16).zeros(), Grid(32).zeros()
    with pytest.raises(GridMismatchError):
        inner_product(a, b)


def test_restricted_mismatched_eps(grid):
    x = grid.sample(np.ones_like)
    with pytest.raises(GridMismatchError):
        restrict(x, 0.25) - restrict(x, 0.125)


def test_values_are_read_only(grid):
    x = grid.sample(np.sin)
    with pytest.raises(ValueError):
        x.values[0] = 1.0


def test_rejects_non_finite(grid):
    with pytest.raises(ParameterError):
        GridFunction(grid, np.full(grid.n_nodes, np.nan))


def test_pair_shape_checked(grid):
    with pytest.raises(ParameterError):
        PairFunction(grid, np.zeros((3, grid.n_nodes)))


@settings(max_examples=50, deadline=None)
@given(
    st.integers(min_value=8, max_value=300),
    st.lists(st.floats(-5, 5), min_size=2, max_size=2),
)
def test_trapezoid_exact_on_linear(n, coef):
    g = Grid(n)
    x = g.sample(lambda t: coef[0] + coef[1] * t)
    one = g.sample(np.ones_like)
    assert inner_product(x, one) == pytest.approx(coef[0] + coef[1] / 2, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=1, max_value=63))
def test_restricted_weights_integrate_subinterval(k):
    g = Grid(128)
    eps = k / 128
    w = restrict(g.sample(np.ones_like), eps)
    assert isinstance(w, RestrictedFunction)
    assert norm(w) ** 2 == pytest.approx(1 - 2 * eps, abs=1e-13)
