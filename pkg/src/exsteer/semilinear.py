"""Mild solutions of the semilinear exchanger equations by Picard iteration.

The Duhamel map

    x(t) = S(t - t0) xi + int_{t0}^t S(t - s) (B u(s) + f(s, x(s), u(s))) ds

is discretised with the composite trapezoid rule on a uniform time grid,
with every ``S(t - s)`` applied in closed form (one interpolation per
quadrature pair, never repeated time stepping). Nonlinearities act
pointwise in theta.
"""

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConvergenceError, KindMismatchError, ParameterError, RegistryError
from .grid import PairFunction
from .semigroup import _left_values, apply_semigroup, coupling_exp

__all__ = [
    "Nonlinearity",
    "Trajectory",
    "register_nonlinearity",
    "get_nonlinearity",
    "available_nonlinearities",
    "eval_nonlinearity",
    "check_nonlinearity",
    "solve_mild",
    "duhamel_linear",
]


@dataclass(frozen=True)
class Nonlinearity:
    """Pointwise nonlinearity ``f(t, x, u)`` with sup bound and Lipschitz modulus.

    ``func`` receives numpy arrays of node values (one component at a
    time for two-stream states) and must be vectorised.
    """

    name: str
    params: dict
    bound: float
    lipschitz: float
    func: Callable = field(repr=False, compare=False)

    @property
    def is_zero(self):
        return self.name == "zero"

    def norm_bound(self, pair=False):
        """Bound on ``||f||`` in L2(0,1) (or its square for pairs)."""
        return self.bound * (math.sqrt(2.0) if pair else 1.0)


def _zero():
    return Nonlinearity("zero", {}, 0.0, 0.0, lambda t, x, u: np.zeros_like(x))


def _sat_tanh(gain=0.1):
    gain = float(gain)
    return Nonlinearity(
        "sat_tanh", {"gain": gain}, abs(gain), abs(gain), lambda t, x, u: gain * np.tanh(x)
    )


def _bounded_mix(gain=0.1):
    gain = float(gain)
    return Nonlinearity(
        "bounded_mix",
        {"gain": gain},
        abs(gain),
        abs(gain),
        lambda t, x, u: gain * np.sin(x + u),
    )


_REGISTRY = {"zero": _zero, "sat_tanh": _sat_tanh, "bounded_mix": _bounded_mix}


def register_nonlinearity(name, factory):
    """Add ``factory(**params) -> Nonlinearity`` to the registry."""
    _REGISTRY[name] = factory


def available_nonlinearities():
    return sorted(_REGISTRY)


def get_nonlinearity(name, **params):
    try:
        factory = _REGISTRY[name]
    except KeyError:
        raise RegistryError(
            f"unknown nonlinearity {name!r}; known: {', '.join(available_nonlinearities())}"
        ) from None
    try:
        return factory(**params)
    except TypeError as exc:
        raise ParameterError(f"bad parameters for {name!r}: {exc}") from None


def _eval_values(f, t, xv, uv):
    return np.asarray(f.func(t, xv, uv), dtype=np.float64)


def eval_nonlinearity(f, t, state, control=None):
    """Apply ``f`` nodewise; pairs are handled component by component."""
    if control is None:
        control = type(state)(state.grid, np.zeros_like(state.values))
    elif type(control) is not type(state):
        raise KindMismatchError("state and control must be of the same kind")
    return type(state)(state.grid, _eval_values(f, t, state.values, control.values))


def check_nonlinearity(f, rng, n_samples=1000, scale=10.0):
    """Spot-check the bound and Lipschitz claims on random triples.

    Returns ``(bound_ok, lipschitz_ok)``.
    """
    t = rng.uniform(0.0, 1.0, n_samples)
    x = rng.normal(0.0, scale, n_samples)
    y = rng.normal(0.0, scale, n_samples)
    u = rng.normal(0.0, scale, n_samples)
    fx = _eval_values(f, t, x, u)
    fy = _eval_values(f, t, y, u)
    bound_ok = bool(np.all(np.abs(fx) <= f.bound * (1 + 1e-12) + 1e-300))
    lip_ok = bool(np.all(np.abs(fx - fy) <= f.lipschitz * np.abs(x - y) * (1 + 1e-12) + 1e-15))
    return bound_ok, lip_ok


@dataclass
class Trajectory:
    """States at increasing time stamps, plus Picard bookkeeping."""

    times: np.ndarray
    states: list
    picard_iterations: int = 0
    picard_gaps: list = field(default_factory=list)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=np.float64)
        if len(self.times) != len(self.states):
            raise ParameterError("one state per time stamp is required")
        if np.any(np.diff(self.times) <= 0):
            raise ParameterError("time stamps must be strictly increasing")
        if len({type(s) for s in self.states}) > 1:
            raise KindMismatchError("trajectory mixes scalar and pair states")

    @property
    def final(self):
        return self.states[-1]

    def __len__(self):
        return len(self.states)

    def values(self):
        """Stacked node values, shape ``(n_stamps, ...)``."""
        return np.stack([s.values for s in self.states])

    @staticmethod
    def concatenate(parts):
        """Join consecutive trajectories, dropping repeated boundary stamps."""
        times, states, gaps, iters = [], [], [], 0
        for i, part in enumerate(parts):
            start = 1 if i > 0 else 0
            times.extend(part.times[start:])
            states.extend(part.states[start:])
            gaps.extend(part.picard_gaps)
            iters += part.picard_iterations
        return Trajectory(np.array(times), states, iters, gaps)


def _semigroup_stack(sys, t, stack, n_cells):
    """``S(t)`` applied to every row of a ``(K, ...)`` stack of node arrays."""
    shifted = _left_values(stack, t, n_cells)
    if not sys.is_pair:
        return math.exp(-sys.a * t) * shifted
    return coupling_exp(sys.h1, sys.h2, t) @ shifted


def _duhamel_sum(sys, h, G, n_cells):
    """``out[j] = sum_k w_jk S((j - k) h) G[k]`` with trapezoid weights on [s_0, s_j].

    Terms sharing a lag ``d = j - k`` share one shift, so the sum is
    accumulated lag by lag over whole stacks.
    """
    n = G.shape[0] - 1
    out = np.zeros_like(G)
    for d in range(n + 1):
        rows = n + 1 - d
        w = np.full(rows, h)
        if d == 0:
            w[:] = 0.5 * h
            w[0] = 0.0
        else:
            w[0] = 0.5 * h
        shifted = _semigroup_stack(sys, d * h, G[:rows], n_cells)
        out[d:] += w.reshape((rows,) + (1,) * (G.ndim - 1)) * shifted
    return out


def _control_samples(sys, u, times, like):
    if u is None:
        return np.zeros((len(times),) + like.shape)
    return np.stack([v.values for v in u.sample(times)])


def _gain_scale(sys):
    g = sys.control_gains
    return g[:, None] if sys.is_pair else g[0]


def solve_mild(
    sys,
    xi,
    u,
    f,
    t_start,
    t_end,
    n_time_steps,
    max_picard=50,
    tol_picard=1e-10,
):
    """Mild solution on ``[t_start, t_end]`` by Picard iteration.

    Parameters
    ----------
    sys : Monotubular or TwoStream
    xi : GridFunction or PairFunction
        State at ``t_start``.
    u : ControlSignal or None
        Control; ``None`` means zero.
    f : Nonlinearity
    n_time_steps : int
        Uniform trapezoid steps in time.
    max_picard, tol_picard
        Iteration cap and sup-norm stopping gap over all stamps.

    Returns
    -------
    Trajectory
        States at every quadrature node, the iteration count and the gap
        sequence.

    Raises
    ------
    ConvergenceError
        If the gap is still above ``tol_picard`` after ``max_picard`` iterations.
    """
    if not t_start < t_end:
        raise ParameterError(f"need t_start < t_end, got {t_start}, {t_end}")
    if int(n_time_steps) != n_time_steps or n_time_steps < 2:
        raise ParameterError(f"n_time_steps must be an integer >= 2, got {n_time_steps}")
    if isinstance(xi, PairFunction) != sys.is_pair:
        raise KindMismatchError(f"{sys.kind} system cannot evolve {type(xi).__name__}")
    n = int(n_time_steps)
    grid = xi.grid
    n_cells = grid.n_cells
    h = (t_end - t_start) / n
    times = t_start + h * np.arange(n + 1)
    times[-1] = t_end

    U = _control_samples(sys, u, times, xi.values)
    free = np.stack([_semigroup_stack(sys, j * h, xi.values[None], n_cells)[0] for j in range(n + 1)])
    X_lin = free + _duhamel_sum(sys, h, _gain_scale(sys) * U, n_cells)

    X = X_lin
    gaps = []
    iterations = 0
    while True:
        iterations += 1
        if f.is_zero:
            X_new = X_lin
        else:
            F = np.stack([_eval_values(f, times[k], X[k], U[k]) for k in range(n + 1)])
            X_new = X_lin + _duhamel_sum(sys, h, F, n_cells)
        gap = float(np.max(np.abs(X_new - X)))
        gaps.append(gap)
        X = X_new
        if gap <= tol_picard:
            break
        if iterations >= max_picard:
            raise ConvergenceError("Picard iteration did not converge", gap, iterations)

    kind = type(xi)
    states = [kind(grid, X[k]) for k in range(n + 1)]
    return Trajectory(times, states, iterations, gaps)


def duhamel_linear(sys, xi, u, t_start, t_end, n_time_steps):
    """Terminal state of the linear system by a plain double loop.

    Reference path for :func:`solve_mild` with ``f = 0``: every term
    ``S(s_j - s_k) B u(s_k)`` is formed by its own semigroup call.
    """
    n = int(n_time_steps)
    h = (t_end - t_start) / n
    times = t_start + h * np.arange(n + 1)
    times[-1] = t_end
    controls = u.sample(times) if u is not None else None
    scale = _gain_scale(sys)
    j = n
    acc = apply_semigroup(sys, times[j] - t_start, xi).values.copy()
    if controls is None:
        return type(xi)(xi.grid, acc)
    for k in range(j + 1):
        w = 0.5 * h if k in (0, j) else h
        bu = type(xi)(xi.grid, scale * controls[k].values)
        acc += w * apply_semigroup(sys, times[j] - times[k], bu).values
    return type(xi)(xi.grid, acc)
