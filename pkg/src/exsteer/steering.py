"""Minimum-norm steering controls for the linear exchanger systems.

A control segment on ``[t0, t1]`` is stored as its steering vector
``v = Q_L(t1 - t0)^{-1} alpha`` and evaluated on demand as

    u(t) = B* S*(t1 - t) L* v,

so no sampled control ever has to be interpolated in time.
"""

import bisect
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .grid import RestrictedFunction, embed, inner_product, norm, restrict
from .gramian import apply_partial_gramian_inverse
from .semigroup import apply_semigroup

__all__ = [
    "ControlSegment",
    "ControlSignal",
    "HeldSegment",
    "steering_segment",
    "synthesize_linear_control",
    "control_energy",
    "support_norm_sq",
    "partial_error",
]


@dataclass(frozen=True)
class ControlSegment:
    """One minimum-norm piece of a control.

    ``alpha`` is the restricted defect the segment removes; the
    minimum energy of the segment is ``<alpha, steering_vector>``.
    """

    t_start: float
    t_end: float
    steering_vector: RestrictedFunction
    sys: object
    alpha: RestrictedFunction = None

    def __post_init__(self):
        if not self.t_start < self.t_end:
            raise ParameterError(f"segment needs t_start < t_end, got {self.t_start}, {self.t_end}")

    @property
    def duration(self):
        return self.t_end - self.t_start

    @property
    def identity_energy(self):
        """``<alpha, Q_L^{-1} alpha>`` (requires ``alpha``)."""
        return inner_product(self.alpha, self.steering_vector)

    def evaluate(self, t):
        lifted = embed(self.steering_vector)
        y = apply_semigroup(self.sys, self.t_end - t, lifted, "adjoint")
        gains = self.sys.control_gains
        scale = gains[:, None] if self.sys.is_pair else gains[0]
        return type(y)(y.grid, scale * y.values)


@dataclass(frozen=True)
class HeldSegment:
    """A control held at one profile ``value`` on ``[t_start, t_end]``."""

    t_start: float
    t_end: float
    value: object

    def __post_init__(self):
        if not self.t_start < self.t_end:
            raise ParameterError(f"segment needs t_start < t_end, got {self.t_start}, {self.t_end}")

    @property
    def duration(self):
        return self.t_end - self.t_start

    def evaluate(self, t):
        return self.value


@dataclass(frozen=True)
class ControlSignal:
    """Piecewise control made of contiguous :class:`ControlSegment` pieces.

    Segment ``n`` owns ``(t_start, t_end]``; the first segment also owns
    its left endpoint. Outside every segment the control is zero.
    """

    sys: object
    grid: object
    segments: tuple = ()

    def __post_init__(self):
        segs = tuple(self.segments)
        for prev, nxt in zip(segs, segs[1:]):
            if nxt.t_start < prev.t_end - 1e-15:
                raise ParameterError("control segments overlap or are out of order")
        object.__setattr__(self, "segments", segs)

    def extend(self, segment):
        return ControlSignal(self.sys, self.grid, self.segments + (segment,))

    @property
    def t_final(self):
        return self.segments[-1].t_end if self.segments else 0.0

    def _zero(self):
        return self.grid.zeros(pair=self.sys.is_pair)

    def owner(self, t):
        """Index of the segment owning time ``t``, or ``None``."""
        if not self.segments:
            return None
        ends = [s.t_end for s in self.segments]
        i = bisect.bisect_left(ends, t)
        if i == len(self.segments):
            return None
        seg = self.segments[i]
        if t > seg.t_start or (i == 0 and t == seg.t_start):
            return i
        return None

    def evaluate(self, t):
        i = self.owner(t)
        if i is None:
            return self._zero()
        return self.segments[i].evaluate(t)

    def sample(self, times):
        """Control at each of ``times``.

        When all times fall inside one closed segment, that segment's
        formula is used throughout, including at its left endpoint; this
        is the one-sided value the trapezoid rule on the segment needs.
        """
        times = np.asarray(times, dtype=np.float64)
        lo, hi = times[0], times[-1]
        for seg in self.segments:
            if seg.t_start <= lo and hi <= seg.t_end:
                return [seg.evaluate(t) for t in times]
        return [self.evaluate(t) for t in times]


def steering_segment(sys, x_start, eta, t_start, t_end, eps, transport_target=True):
    """Minimum-norm segment on ``[t_start, t_end]``.

    With ``transport_target`` the restricted defect is
    ``L S(tau)(eta - x_start)`` and the segment lands on ``L S(tau) eta``;
    otherwise it is ``L (eta - S(tau) x_start)`` and the segment lands
    on ``L eta``. Here ``tau = t_end - t_start``.
    """
    tau = t_end - t_start
    if transport_target:
        alpha = restrict(apply_semigroup(sys, tau, eta - x_start), eps)
    else:
        alpha = restrict(eta - apply_semigroup(sys, tau, x_start), eps)
    v = apply_partial_gramian_inverse(sys, tau, eps, alpha)
    return ControlSegment(t_start, t_end, v, sys, alpha)


def synthesize_linear_control(sys, xi, eta, tau=0.0, T=None, eps=None, transport_target=True):
    """Single-segment control on ``[tau, T]`` steering ``xi`` toward ``eta``.

    ``T`` and ``eps`` default to the system's horizon and margin; ``eps``
    is snapped to the grid.
    """
    T = sys.T if T is None else float(T)
    if not 0 <= tau < T:
        raise ParameterError(f"need 0 <= tau < T, got tau={tau}, T={T}")
    grid = xi.grid
    eps = grid.snap_eps(sys.eps if eps is None else eps)
    seg = steering_segment(sys, xi, eta, float(tau), T, eps, transport_target)
    return ControlSignal(sys, grid, (seg,))


def support_norm_sq(y):
    """``||y||^2`` by the trapezoid rule on the support of ``y``.

    Controls are zero extensions cut off at [eps, 1 - eps], so they jump
    where the support ends. A node where the support starts or stops after
    a zero neighbour is an endpoint of the support and gets half a cell,
    which keeps the rule second order instead of first.
    """
    vals = np.atleast_2d(y.values)
    w = y.grid.weights.copy()
    alive = np.any(vals != 0.0, axis=0)
    starts = alive[1:] & ~alive[:-1]
    stops = alive[:-1] & ~alive[1:]
    w[1:][starts] = 0.5 * y.grid.spacing
    w[:-1][stops] = 0.5 * y.grid.spacing
    return float(np.sum(w * np.sum(vals**2, axis=0)))


def control_energy(u, n_time_steps=256):
    """``int ||u(t)||^2 dt``: trapezoid in time on every segment, trapezoid in theta.

    The theta rule runs over the support of ``u(t)`` (see :func:`support_norm_sq`).
    """
    if int(n_time_steps) != n_time_steps or n_time_steps < 2:
        raise ParameterError(f"n_time_steps must be an integer >= 2, got {n_time_steps}")
    total = 0.0
    for seg in u.segments:
        ts = np.linspace(seg.t_start, seg.t_end, int(n_time_steps) + 1)
        sq = np.array([support_norm_sq(seg.evaluate(t)) for t in ts])
        h = seg.duration / n_time_steps
        total += h * (np.sum(sq) - 0.5 * (sq[0] + sq[-1]))
    return float(total)


def partial_error(xT, eta, eps):
    """``||L xT - L eta||`` on [eps, 1 - eps]."""
    return norm(restrict(xT, eps) - restrict(eta, eps))
