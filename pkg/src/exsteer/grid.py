"""Uniform-grid representation of L2(0, 1) and L2(0, 1) x L2(0, 1).

Functions are stored as node samples on ``theta_i = i / n_cells`` and
integrated with the composite trapezoid rule, which is exact for the
piecewise-linear interpolants used everywhere else in the package.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import GridMismatchError, KindMismatchError, ParameterError

__all__ = [
    "Grid",
    "GridFunction",
    "PairFunction",
    "RestrictedFunction",
    "inner_product",
    "norm",
    "restrict",
    "embed",
    "project",
]

# tolerance, in units of cells, for deciding that a position sits on a node
_NODE_TOL = 1e-9


def _frozen(values):
    arr = np.array(values, dtype=np.float64, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Grid:
    """Uniform grid on [0, 1] with ``n_cells`` cells and trapezoid weights."""

    n_cells: int

    def __post_init__(self):
        if int(self.n_cells) != self.n_cells or self.n_cells < 1:
            raise ParameterError(f"n_cells must be a positive integer, got {self.n_cells!r}")
        object.__setattr__(self, "n_cells", int(self.n_cells))

    @property
    def spacing(self):
        return 1.0 / self.n_cells

    @property
    def n_nodes(self):
        return self.n_cells + 1

    @cached_property
    def nodes(self):
        nodes = np.arange(self.n_nodes, dtype=np.float64) / self.n_cells
        nodes.setflags(write=False)
        return nodes

    @cached_property
    def weights(self):
        w = np.full(self.n_nodes, self.spacing)
        w[0] = w[-1] = 0.5 * self.spacing
        w.setflags(write=False)
        return w

    def snap_eps(self, eps):
        """Return ``eps`` moved to the nearest node, checking the admissible range.

        The snapped value must satisfy ``spacing <= eps <= 1/2 - spacing``.
        """
        eps = float(eps)
        if not 0.0 < eps < 0.5:
            raise ParameterError(f"eps must lie in (0, 1/2), got {eps}")
        k = int(round(eps * self.n_cells))
        if k < 1 or 2 * k > self.n_cells - 2:
            raise ParameterError(
                f"eps={eps} snaps to {k}/{self.n_cells}, outside "
                f"[{self.spacing}, {0.5 - self.spacing}]"
            )
        return k / self.n_cells

    def eps_index(self, eps):
        """Node index of ``eps``; raises if ``eps`` is not (numerically) a node."""
        eps = float(eps)
        if not 0.0 < eps < 0.5:
            raise ParameterError(f"eps must lie in (0, 1/2), got {eps}")
        s = eps * self.n_cells
        k = int(round(s))
        if abs(s - k) > _NODE_TOL:
            raise ParameterError(f"eps={eps} is not a node of the {self.n_cells}-cell grid")
        if k < 1 or 2 * k > self.n_cells - 2:
            raise ParameterError(f"eps={eps} outside [{self.spacing}, {0.5 - self.spacing}]")
        return k

    def restricted_slice(self, eps):
        k = self.eps_index(eps)
        return slice(k, self.n_cells - k + 1)

    def sample(self, func):
        """Sample a vectorised callable at the nodes."""
        return GridFunction(self, func(self.nodes))

    def zeros(self, pair=False):
        if pair:
            return PairFunction(self, np.zeros((2, self.n_nodes)))
        return GridFunction(self, np.zeros(self.n_nodes))


class _Field:
    """Shared arithmetic for node-sampled fields (node axis is the last one)."""

    __slots__ = ()
    is_pair = False

    def _new(self, values):
        return type(self)(self.grid, values)

    def _check(self, other):
        if type(other) is not type(self):
            raise KindMismatchError(
                f"cannot combine {type(self).__name__} with {type(other).__name__}"
            )
        if other.grid != self.grid:
            raise GridMismatchError(f"grids differ: {self.grid} vs {other.grid}")

    def __add__(self, other):
        self._check(other)
        return self._new(self.values + other.values)

    def __sub__(self, other):
        self._check(other)
        return self._new(self.values - other.values)

    def __mul__(self, scalar):
        return self._new(self.values * float(scalar))

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self._new(self.values / float(scalar))

    def __neg__(self):
        return self._new(-self.values)

    def __eq__(self, other):
        return (
            type(other) is type(self)
            and other.grid == self.grid
            and np.array_equal(other.values, self.values)
        )

    __hash__ = None

    def sup_norm(self):
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0


class GridFunction(_Field):
    """Samples of a scalar L2(0, 1) function at the grid nodes."""

    __slots__ = ("grid", "values")

    def __init__(self, grid, values):
        values = _frozen(values)
        if values.shape != (grid.n_nodes,):
            raise ParameterError(
                f"expected {grid.n_nodes} samples, got array of shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise ParameterError("GridFunction samples must be finite")
        self.grid = grid
        self.values = values

    def __repr__(self):
        return f"GridFunction(n_cells={self.grid.n_cells})"


class PairFunction(_Field):
    """Two scalar fields ``(x1, x2)`` on one grid; stored as a ``(2, n_nodes)`` array."""

    __slots__ = ("grid", "values")
    is_pair = True

    def __init__(self, grid, values):
        values = _frozen(values)
        if values.shape != (2, grid.n_nodes):
            raise ParameterError(
                f"expected shape (2, {grid.n_nodes}), got {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise ParameterError("PairFunction samples must be finite")
        self.grid = grid
        self.values = values

    @classmethod
    def from_components(cls, x1, x2):
        if x1.grid != x2.grid:
            raise GridMismatchError("pair components must share one grid")
        return cls(x1.grid, np.stack([x1.values, x2.values]))

    @property
    def x1(self):
        return GridFunction(self.grid, self.values[0])

    @property
    def x2(self):
        return GridFunction(self.grid, self.values[1])

    def __repr__(self):
        return f"PairFunction(n_cells={self.grid.n_cells})"


class RestrictedFunction(_Field):
    """Samples on the nodes of [eps, 1 - eps] (scalar or pair)."""

    __slots__ = ("grid", "eps", "values")

    def __init__(self, grid, eps, values):
        sl = grid.restricted_slice(eps)
        count = sl.stop - sl.start
        values = _frozen(values)
        if values.shape not in ((count,), (2, count)):
            raise ParameterError(
                f"expected {count} samples per component on [{eps}, {1 - eps}], "
                f"got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise ParameterError("RestrictedFunction samples must be finite")
        self.grid = grid
        self.eps = grid.eps_index(eps) / grid.n_cells
        self.values = values

    @property
    def is_pair(self):
        return self.values.ndim == 2

    @property
    def nodes(self):
        return self.grid.nodes[self.grid.restricted_slice(self.eps)]

    @property
    def weights(self):
        n = self.values.shape[-1]
        w = np.full(n, self.grid.spacing)
        w[0] = w[-1] = 0.5 * self.grid.spacing
        return w

    def _new(self, values):
        return RestrictedFunction(self.grid, self.eps, values)

    def _check(self, other):
        if not isinstance(other, RestrictedFunction) or other.is_pair != self.is_pair:
            raise KindMismatchError("cannot combine restricted functions of different kinds")
        if other.grid != self.grid or other.eps != self.eps:
            raise GridMismatchError("restricted functions live on different intervals")

    def __eq__(self, other):
        return (
            isinstance(other, RestrictedFunction)
            and other.grid == self.grid
            and other.eps == self.eps
            and np.array_equal(other.values, self.values)
        )

    __hash__ = None

    def __repr__(self):
        kind = "pair" if self.is_pair else "scalar"
        return f"RestrictedFunction({kind}, n_cells={self.grid.n_cells}, eps={self.eps})"


def _weighted_sum(weights, integrand):
    # numpy reduces contiguous float64 with pairwise summation: fixed order
    return float(np.sum(weights * integrand))


def inner_product(x, y):
    """Trapezoid L2 inner product; for pairs, the sum of the component products."""
    x._check(y)
    w = x.weights if isinstance(x, RestrictedFunction) else x.grid.weights
    if x.values.ndim == 1:
        return _weighted_sum(w, x.values * y.values)
    return _weighted_sum(w, x.values[0] * y.values[0]) + _weighted_sum(
        w, x.values[1] * y.values[1]
    )


def norm(x):
    return float(np.sqrt(max(inner_product(x, x), 0.0)))


def restrict(x, eps):
    """Samples of ``x`` on the nodes of [eps, 1 - eps] (the operator L_eps)."""
    if not isinstance(x, (GridFunction, PairFunction)):
        raise KindMismatchError(f"restrict expects a grid or pair function, got {type(x).__name__}")
    sl = x.grid.restricted_slice(eps)
    return RestrictedFunction(x.grid, eps, x.values[..., sl])


def embed(w):
    """Zero extension of a restricted function back to [0, 1] (the adjoint L_eps*)."""
    grid = w.grid
    sl = grid.restricted_slice(w.eps)
    if w.is_pair:
        out = np.zeros((2, grid.n_nodes))
        out[:, sl] = w.values
        return PairFunction(grid, out)
    out = np.zeros(grid.n_nodes)
    out[sl] = w.values
    return GridFunction(grid, out)


def project(x, eps):
    """``x`` with every sample outside [eps, 1 - eps] set to zero."""
    return embed(restrict(x, eps))
