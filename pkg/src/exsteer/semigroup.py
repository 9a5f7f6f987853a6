"""Closed-form translation semigroups and the two heat-exchanger semigroups.

Monotubular:  [S(t)x](theta) = exp(-a t) x(theta - t), zero inflow at theta = 0.
Two-stream:   S(t) = U(t) exp(A1 t) with U(t) the componentwise left
translation and ``A1 = [[-h1, h1], [h2, -h2]]``.

Off-grid shifts interpolate linearly between neighbouring nodes; values
are never obtained by time stepping.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import KindMismatchError, ParameterError
from .grid import GridFunction, PairFunction

__all__ = [
    "Monotubular",
    "TwoStream",
    "translate_left",
    "translate_right",
    "coupling_exp",
    "coupling_generator",
    "apply_semigroup",
    "semigroup_bound",
]

_NODE_TOL = 1e-9


@dataclass(frozen=True)
class Monotubular:
    """Monotubular exchanger ``x_t = -x_theta - a x + b u``.

    Parameters
    ----------
    a : float
        Thermal capacity of the medium, ``a > 0``.
    b : float
        Control gain, nonzero.
    T : float
        Control horizon.
    eps : float
        Half-margin of the controlled interval [eps, 1 - eps].
    """

    a: float
    b: float
    T: float = 1.0
    eps: float = 0.1

    kind = "monotubular"
    is_pair = False

    def __post_init__(self):
        if not self.a > 0:
            raise ParameterError(f"a must be positive, got {self.a}")
        if self.b == 0 or not math.isfinite(self.b):
            raise ParameterError(f"b must be finite and nonzero, got {self.b}")
        _check_horizon(self.T, self.eps)

    @property
    def control_gains(self):
        return np.array([self.b])


@dataclass(frozen=True)
class TwoStream:
    """Two-stream parallel-flow exchanger with coupling ``h1, h2`` and gains ``b1, b2``."""

    h1: float
    h2: float
    b1: float
    b2: float
    T: float = 1.0
    eps: float = 0.1

    kind = "two_stream"
    is_pair = True

    def __post_init__(self):
        for name in ("h1", "h2"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"{name} must be positive, got {getattr(self, name)}")
        for name in ("b1", "b2"):
            val = getattr(self, name)
            if val == 0 or not math.isfinite(val):
                raise ParameterError(f"{name} must be finite and nonzero, got {val}")
        _check_horizon(self.T, self.eps)

    @property
    def control_gains(self):
        return np.array([self.b1, self.b2])

    @property
    def is_special_case(self):
        """True for ``h1 = h2 = 1/2`` and ``b1 = b2 = 1``."""
        return self.h1 == self.h2 == 0.5 and self.b1 == self.b2 == 1.0


def _check_horizon(T, eps):
    if not T > 0 or not math.isfinite(T):
        raise ParameterError(f"horizon T must be positive, got {T}")
    if not 0 < eps < 0.5:
        raise ParameterError(f"eps must lie in (0, 1/2), got {eps}")


def _shift_parts(t, n_cells):
    """Split a shift of ``t`` into whole cells ``m`` and a fraction ``phi`` in [0, 1)."""
    s = t * n_cells
    m = math.floor(s)
    phi = s - m
    if phi < _NODE_TOL:
        phi = 0.0
    elif phi > 1.0 - _NODE_TOL:
        m, phi = m + 1, 0.0
    return m, phi


def _left_values(values, t, n_cells):
    """Left translation along the last axis of ``values``."""
    if t < 0:
        raise ParameterError(f"translation time must be nonnegative, got {t}")
    m, phi = _shift_parts(t, n_cells)
    n = values.shape[-1]
    out = np.zeros_like(values)
    if phi == 0.0:
        # m = n - 1 means t = 1: the lone node theta - t = 0 is dropped so S(1) = 0
        if m < n - 1:
            out[..., m:] = values[..., : n - m]
        return out
    # theta_i - t lies between nodes i-m-1 and i-m; nodes with i-m-1 < 0 are cut off
    if m + 1 < n:
        out[..., m + 1 :] = (1.0 - phi) * values[..., 1 : n - m] + phi * values[..., : n - m - 1]
    return out


def _right_values(values, t, n_cells):
    """Right translation along the last axis of ``values``."""
    if t < 0:
        raise ParameterError(f"translation time must be nonnegative, got {t}")
    m, phi = _shift_parts(t, n_cells)
    n = values.shape[-1]
    out = np.zeros_like(values)
    if phi == 0.0:
        if m < n - 1:
            out[..., : n - m] = values[..., m:]
        return out
    if m + 1 < n:
        out[..., : n - m - 1] = (1.0 - phi) * values[..., m : n - 1] + phi * values[..., m + 1 :]
    return out


def translate_left(x, t):
    """Left translation ``x(theta - t)`` with zero inflow, for scalar or pair fields."""
    return type(x)(x.grid, _left_values(x.values, float(t), x.grid.n_cells))


def translate_right(x, t):
    """Right translation ``x(theta + t)``, zero beyond theta = 1."""
    return type(x)(x.grid, _right_values(x.values, float(t), x.grid.n_cells))


def coupling_generator(h1, h2):
    return np.array([[-h1, h1], [h2, -h2]], dtype=np.float64)


def coupling_exp(h1, h2, t):
    """Matrix exponential ``exp(A1 t)`` of the two-stream coupling, in closed form."""
    if not (h1 > 0 and h2 > 0):
        raise ParameterError(f"h1, h2 must be positive, got {h1}, {h2}")
    if t < 0:
        raise ParameterError(f"t must be nonnegative, got {t}")
    h = h1 + h2
    decay = math.exp(-h * t)
    grow = -math.expm1(-h * t)
    return np.array(
        [
            [(h2 + h1 * decay) / h, h1 * grow / h],
            [h2 * grow / h, (h1 + h2 * decay) / h],
        ]
    )


def _check_kind(sys, state):
    if isinstance(state, PairFunction) != sys.is_pair or not isinstance(
        state, (GridFunction, PairFunction)
    ):
        raise KindMismatchError(
            f"{sys.kind} system cannot act on {type(state).__name__}"
        )


def apply_semigroup(sys, t, state, direction="forward"):
    """Apply ``S(t)`` (``direction="forward"``) or ``S*(t)`` (``"adjoint"``).

    Parameters
    ----------
    sys : Monotubular or TwoStream
    t : float
        Nonnegative time.
    state : GridFunction or PairFunction
        Must match the system kind.
    direction : {"forward", "adjoint"}
    """
    _check_kind(sys, state)
    t = float(t)
    n = state.grid.n_cells
    if direction == "forward":
        shifted = _left_values(state.values, t, n)
    elif direction == "adjoint":
        shifted = _right_values(state.values, t, n)
    else:
        raise ParameterError(f"direction must be 'forward' or 'adjoint', got {direction!r}")
    if not sys.is_pair:
        return GridFunction(state.grid, math.exp(-sys.a * t) * shifted)
    E = coupling_exp(sys.h1, sys.h2, t)
    if direction == "adjoint":
        E = E.T
    return PairFunction(state.grid, E @ shifted)


def semigroup_bound(sys, n_samples=2001):
    """``K = sup_{0 <= t <= T} ||S(t)||`` in L2.

    The translation part has norm one for t < 1, so K is the largest
    spectral norm of the pointwise factor. For the monotubular system and
    for symmetric coupling (h1 = h2) this is exactly 1.
    """
    if not sys.is_pair or sys.h1 == sys.h2:
        return 1.0
    ts = np.linspace(0.0, min(sys.T, 1.0), n_samples)
    return float(max(np.linalg.norm(coupling_exp(sys.h1, sys.h2, t), 2) for t in ts))
