"""Controllability Gramians of the heat-exchanger systems.

Both semigroups satisfy ``S(s) S*(s) = 1{theta >= s} exp(A1 s) exp(A1* s)``
pointwise, so the Gramian ``Q(t) = int_0^t S(s) B B* S*(s) ds`` is a
multiplication operator whose value at ``theta`` depends only on
``m = min(t, theta)``:

* monotubular: ``b^2 (1 - exp(-2 a m)) / (2 a)``;
* two-stream:  ``G(m) = int_0^m exp(A1 s) D exp(A1* s) ds`` with
  ``D = diag(b1^2, b2^2)``; for ``h1 = h2 = 1/2, b1 = b2 = 1`` this is
  ``(1/4) [[u, v], [v, u]]`` with ``u = 2m + 1 - exp(-2m)`` and
  ``v = 2m - 1 + exp(-2m)``.

:func:`gramian_oracle` rebuilds ``Q(t) x`` from the semigroup module by
time quadrature and never touches the formulas above.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import KindMismatchError, ParameterError, SingularityError
from .grid import (
    GridFunction,
    PairFunction,
    RestrictedFunction,
    inner_product,
    norm,
)
from .semigroup import apply_semigroup, semigroup_bound

__all__ = [
    "CoercivityReport",
    "two_stream_uv",
    "gramian_multiplier",
    "apply_gramian",
    "gramian_oracle",
    "apply_partial_gramian",
    "apply_partial_gramian_inverse",
    "partial_gramian_min_eig",
    "condition_e_cap",
    "coercivity_report",
    "noncoercivity_demo",
    "noncoercivity_bound",
]


def two_stream_uv(t, theta):
    """Functions ``u(t, theta)``, ``v(t, theta)`` of the symmetric two-stream case."""
    m = np.minimum(t, np.clip(theta, 0.0, None))
    decay = np.exp(-2.0 * m)
    return 2.0 * m + 1.0 - decay, 2.0 * m - 1.0 + decay


def _two_stream_coefficients(sys):
    # exp(A1 s) = P0 + exp(-h s) P1, P0/P1 the spectral projectors of A1
    h1, h2 = sys.h1, sys.h2
    h = h1 + h2
    P0 = np.array([[h2, h1], [h2, h1]]) / h
    P1 = np.array([[h1, -h1], [-h2, h2]]) / h
    D = np.diag(sys.control_gains**2)
    C0 = P0 @ D @ P0.T
    C1 = P0 @ D @ P1.T + P1 @ D @ P0.T
    C2 = P1 @ D @ P1.T
    return h, C0, C1, C2


def _blocks(sys, m):
    """Multiplier at ``m = min(t, theta)`` (array); shape ``m.shape`` or ``m.shape + (2, 2)``."""
    m = np.asarray(m, dtype=np.float64)
    if not sys.is_pair:
        return sys.b**2 * (-np.expm1(-2.0 * sys.a * m)) / (2.0 * sys.a)
    h, C0, C1, C2 = _two_stream_coefficients(sys)
    g0 = m[..., None, None]
    g1 = (-np.expm1(-h * m) / h)[..., None, None]
    g2 = (-np.expm1(-2.0 * h * m) / (2.0 * h))[..., None, None]
    return g0 * C0 + g1 * C1 + g2 * C2


def _check_t(t):
    if not t > 0:
        raise ParameterError(f"Gramian time must be positive, got {t}")


def gramian_multiplier(sys, t, theta):
    """Pointwise multiplier of ``Q(t)`` at ``theta`` (scalar, or 2x2 for two-stream)."""
    _check_t(t)
    theta = np.asarray(theta, dtype=np.float64)
    if np.any((theta < 0) | (theta > 1)):
        raise ParameterError("theta must lie in [0, 1]")
    out = _blocks(sys, np.minimum(t, theta))
    if out.ndim == 0:
        return float(out)
    return out


def _check_kind(sys, x):
    if isinstance(x, (GridFunction, PairFunction)):
        pair = isinstance(x, PairFunction)
    elif isinstance(x, RestrictedFunction):
        pair = x.is_pair
    else:
        raise KindMismatchError(f"unsupported operand {type(x).__name__}")
    if pair != sys.is_pair:
        raise KindMismatchError(f"{sys.kind} system cannot act on this operand")


def _apply_blocks(blocks, values, pair):
    if not pair:
        return blocks * values
    return np.einsum("nij,jn->in", blocks, values)


def apply_gramian(sys, t, x):
    """``Q(t) x`` by pointwise multiplication."""
    _check_t(t)
    _check_kind(sys, x)
    blocks = _blocks(sys, np.minimum(t, x.grid.nodes))
    return type(x)(x.grid, _apply_blocks(blocks, x.values, sys.is_pair))


def gramian_oracle(sys, t, x, n_steps):
    """``Q(t) x`` by composite trapezoid in ``s`` of ``S(s) B B* S*(s) x``.

    Only :func:`exsteer.semigroup.apply_semigroup` is used.
    """
    _check_t(t)
    _check_kind(sys, x)
    if int(n_steps) != n_steps or n_steps < 2:
        raise ParameterError(f"n_steps must be an integer >= 2, got {n_steps}")
    n_steps = int(n_steps)
    gains_sq = sys.control_gains**2
    h = t / n_steps
    acc = np.zeros_like(x.values)
    for k in range(n_steps + 1):
        y = apply_semigroup(sys, k * h, x, "adjoint")
        vals = y.values * (gains_sq[:, None] if sys.is_pair else gains_sq[0])
        z = apply_semigroup(sys, k * h, type(x)(x.grid, vals), "forward")
        weight = 0.5 * h if k in (0, n_steps) else h
        acc += weight * z.values
    return type(x)(x.grid, acc)


def _restricted_blocks(sys, t, w):
    return _blocks(sys, np.minimum(t, w.nodes))


def apply_partial_gramian(sys, t, w):
    """``Q_L(t) w = L Q(t) L* w`` on the restricted interval."""
    _check_t(t)
    _check_kind(sys, w)
    blocks = _restricted_blocks(sys, t, w)
    return RestrictedFunction(w.grid, w.eps, _apply_blocks(blocks, w.values, sys.is_pair))


def apply_partial_gramian_inverse(sys, t, eps, w):
    """Solve ``Q_L(t) v = w`` nodewise on [eps, 1 - eps]."""
    if not t > 0:
        raise SingularityError(f"partial Gramian is singular at t={t}")
    _check_kind(sys, w)
    if not isinstance(w, RestrictedFunction):
        raise KindMismatchError("apply_partial_gramian_inverse expects a RestrictedFunction")
    if abs(w.eps - eps) > 0.5 * w.grid.spacing:
        raise ParameterError(f"w is restricted with eps={w.eps}, not {eps}")
    blocks = _restricted_blocks(sys, t, w)
    if not sys.is_pair:
        if np.any(blocks <= 0):
            raise SingularityError("partial Gramian multiplier vanishes on [eps, 1 - eps]")
        return RestrictedFunction(w.grid, w.eps, w.values / blocks)
    a, b, d = blocks[:, 0, 0], blocks[:, 0, 1], blocks[:, 1, 1]
    det = a * d - b * b
    if np.any(det <= 0) or np.any(a <= 0):
        raise SingularityError("partial Gramian block is not positive definite")
    x1, x2 = w.values
    out = np.stack([(d * x1 - b * x2) / det, (a * x2 - b * x1) / det])
    return RestrictedFunction(w.grid, w.eps, out)


def partial_gramian_min_eig(sys, s, eps):
    """Smallest eigenvalue of ``Q_L(s)`` in the continuum (no grid).

    For theta >= eps the block depends on ``min(s, theta)`` and grows in
    the PSD order, so the minimum over [eps, 1 - eps] sits at theta = eps.
    """
    block = _blocks(sys, min(s, eps))
    if not sys.is_pair:
        return float(block)
    return float(np.linalg.eigvalsh(block)[0])


def condition_e_cap(sys, eps, n_samples=400):
    """``sup_{0 < s <= T} s / lambda_min(Q_L(s))``, the condition (E) constant.

    For ``s >= eps`` the ratio grows linearly, so the supremum is attained
    at ``s = T`` once ``T >= eps``; below ``eps`` it is scanned on a
    logarithmic grid (the scan is exact for the monotone closed forms).
    """
    T = sys.T
    knee = min(T, eps)
    ss = np.geomspace(knee * 1e-6, knee, n_samples)
    scan = max(s / partial_gramian_min_eig(sys, s, eps) for s in ss)
    return float(max(scan, T / partial_gramian_min_eig(sys, T, eps)))


@dataclass(frozen=True)
class CoercivityReport:
    """Coercivity of ``Q_L(t)`` on [eps, 1 - eps] and the condition (E) check.

    ``small_time_constant`` is the small-time limit of ``t ||Q_L(t)^{-1}||``
    (``1/b^2``); it is an infimum, and ``small_time_constant_holds`` records
    whether this particular ``t`` stays under it.
    """

    t: float
    eps: float
    c_min: float
    inv_norm: float
    product: float
    condition_E_bound: float
    passed: bool
    coercive: bool
    small_time_constant: float
    small_time_constant_holds: bool

    def as_row(self):
        return {
            "t": self.t,
            "c_min": self.c_min,
            "inv_norm": self.inv_norm,
            "t_times_inv_norm": self.product,
            "bound": self.condition_E_bound,
            "pass": self.passed,
        }


def _nodewise_min_eig(sys, t, theta):
    blocks = _blocks(sys, np.minimum(t, theta))
    if not sys.is_pair:
        return float(np.min(blocks))
    return float(np.min(np.linalg.eigvalsh(blocks)[:, 0]))


def coercivity_report(sys, t, eps, grid):
    """Nodewise coercivity constant of ``Q_L(t)`` and the (E) verdict.

    ``eps = 0`` examines the full interval (interior nodes); the constant
    then shrinks with the grid spacing and the report marks it non-coercive.
    """
    _check_t(t)
    gains_sq = sys.control_gains**2
    small_time_constant = float(1.0 / np.min(gains_sq))
    if eps == 0:
        theta = grid.nodes[1:-1]
        c_min = _nodewise_min_eig(sys, t, theta)
        inv = math.inf if c_min <= 0 else 1.0 / c_min
        return CoercivityReport(
            t=float(t),
            eps=0.0,
            c_min=c_min,
            inv_norm=inv,
            product=t * inv,
            condition_E_bound=math.inf,
            passed=False,
            coercive=False,
            small_time_constant=small_time_constant,
            small_time_constant_holds=False,
        )
    eps = grid.snap_eps(eps)
    theta = grid.nodes[grid.restricted_slice(eps)]
    c_min = _nodewise_min_eig(sys, t, theta)
    coercive = c_min > 0
    inv = 1.0 / c_min if coercive else math.inf
    product = t * inv
    cap = condition_e_cap(sys, eps)
    return CoercivityReport(
        t=float(t),
        eps=eps,
        c_min=c_min,
        inv_norm=inv,
        product=product,
        condition_E_bound=cap,
        passed=bool(coercive and product <= cap + 1e-9),
        coercive=bool(coercive),
        small_time_constant=small_time_constant,
        small_time_constant_holds=bool(product <= small_time_constant + 1e-9),
    )


def _boundary_indicator(grid, delta, support):
    theta = grid.nodes
    if support == "both":
        return ((theta <= delta) | (theta >= 1.0 - delta)).astype(np.float64)
    if support == "inflow":
        return (theta <= delta).astype(np.float64)
    raise ParameterError(f"support must be 'both' or 'inflow', got {support!r}")


def noncoercivity_demo(sys, t, delta, grid, support="both"):
    """Rayleigh quotient ``<Q(t) x, x> / ||x||^2`` for a boundary indicator ``x``.

    ``support="both"`` uses the indicator of [0, delta] U [1 - delta, 1];
    ``support="inflow"`` keeps only [0, delta]. Only the inflow end makes
    the quotient small: at the outflow end ``min(t, theta)`` is close to t.
    """
    if not 0 < delta < 0.5:
        raise ParameterError(f"delta must lie in (0, 1/2), got {delta}")
    ind = _boundary_indicator(grid, delta, support)
    x = PairFunction(grid, np.stack([ind, ind])) if sys.is_pair else GridFunction(grid, ind)
    return inner_product(apply_gramian(sys, t, x), x) / norm(x) ** 2


def noncoercivity_bound(sys, delta):
    """Upper bound ``K^2 max(b_i^2) delta`` for the inflow-supported quotient."""
    K = semigroup_bound(sys)
    return float(K**2 * np.max(sys.control_gains**2) * delta)
