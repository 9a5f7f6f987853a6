"""Piecewise partial steering of the semilinear systems on a dyadic schedule.

Stage ``n`` runs on ``[t_{n-1}, t_n]`` with ``tau_n = T / 2**n`` and uses
the minimum-norm linear control that would bring ``x_{n-1}`` to
``L S(tau_n) eta`` in the absence of the nonlinearity. The nonlinear
drift is left uncorrected; its contribution per stage is at most
``M K tau_n``, so the restricted error tends to zero with the schedule.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, ParameterError
from .grid import norm, restrict
from .semigroup import apply_semigroup, semigroup_bound
from .semilinear import Trajectory, solve_mild
from .steering import ControlSignal, control_energy, partial_error, steering_segment

__all__ = [
    "DyadicSchedule",
    "StageRecord",
    "SteeringReport",
    "TargetDiagnostics",
    "dyadic_schedule",
    "stage_error_bound",
    "validate_target",
    "steer_semilinear",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DyadicSchedule:
    T: float
    n_stages: int
    taus: tuple
    times: tuple

    def start(self, n):
        """``t_{n-1}`` for stage ``n`` (1-based)."""
        return 0.0 if n == 1 else self.times[n - 2]


def dyadic_schedule(T, n_stages):
    """Stage lengths ``T / 2**n`` and end times ``T (1 - 2**-n)``, ``n = 1..n_stages``."""
    if int(n_stages) != n_stages or n_stages < 1:
        raise ParameterError(f"n_stages must be an integer >= 1, got {n_stages}")
    if not T > 0:
        raise ParameterError(f"T must be positive, got {T}")
    n_stages = int(n_stages)
    taus = tuple(T * 2.0**-n for n in range(1, n_stages + 1))
    times = tuple(T * (1.0 - 2.0**-n) for n in range(1, n_stages + 1))
    return DyadicSchedule(float(T), n_stages, taus, times)


def stage_error_bound(sys, eta, f, tau, K=None):
    """``||S(tau) eta - eta|| + M K tau``, the per-stage bound on ``||L x_n - L eta||``."""
    if not tau > 0:
        raise ParameterError(f"tau must be positive, got {tau}")
    K = semigroup_bound(sys) if K is None else K
    M = f.norm_bound(sys.is_pair)
    return norm(apply_semigroup(sys, tau, eta) - eta) + M * K * tau


@dataclass(frozen=True)
class TargetDiagnostics:
    """Outcome of :func:`validate_target`.

    ``derivative_norms`` are finite-difference L2 norms of ``d eta/d theta``
    on successively finer subgrids; ``growth`` is the last refinement ratio.
    """

    passed: bool
    outflow_values: tuple
    inflow_values: tuple
    derivative_norms: tuple
    growth: float
    messages: tuple

    def __bool__(self):
        return self.passed


def _fd_norm(values, n_cells):
    d = np.diff(values, axis=-1) * n_cells
    return float(np.sqrt(np.sum(d**2) / n_cells))


def validate_target(sys, eta, eps=None, boundary_tol=1e-8, growth_tol=1.2):
    """Check that ``eta`` is a plausible element of the generator domain.

    Requires ``eta(1) = 0`` and ``eta(0) = 0`` for every component and a
    finite-difference derivative whose L2 norm does not grow under grid
    refinement (a jump makes it grow like ``spacing**-1/2``).
    """
    grid = eta.grid
    vals = np.atleast_2d(eta.values)
    scale = max(1.0, float(np.max(np.abs(vals))))
    messages = []
    outflow = tuple(float(v) for v in vals[:, -1])
    inflow = tuple(float(v) for v in vals[:, 0])
    if any(abs(v) > boundary_tol * scale for v in outflow):
        messages.append(f"eta(1) = {outflow} is not zero")
    if any(abs(v) > boundary_tol * scale for v in inflow):
        messages.append(f"eta(0) = {inflow} is not zero (inflow condition of the generator)")

    levels = []
    stride = 1
    while grid.n_cells % stride == 0 and grid.n_cells // stride >= 16:
        levels.append(stride)
        stride *= 2
    norms = []
    for stride in reversed(levels[:4]):
        sub = vals[:, ::stride]
        norms.append(sum(_fd_norm(c, grid.n_cells // stride) for c in sub))
    growth = norms[-1] / norms[-2] if len(norms) > 1 and norms[-2] > 0 else 1.0
    if growth > growth_tol:
        messages.append(
            f"derivative norm grows by {growth:.3f} per refinement; eta is not in H1"
        )
    return TargetDiagnostics(
        passed=not messages,
        outflow_values=outflow,
        inflow_values=inflow,
        derivative_norms=tuple(norms),
        growth=float(growth),
        messages=tuple(messages),
    )


@dataclass(frozen=True)
class StageRecord:
    n: int
    tau: float
    t_n: float
    err_vs_transported_target: float
    err_vs_target: float
    bound: float
    stage_energy: float
    identity_energy: float
    cumulative_energy: float
    picard_iterations: int
    state_norm_before: float

    def as_row(self):
        return {
            "n": self.n,
            "tau_n": self.tau,
            "t_n": self.t_n,
            "err_vs_transported_target": self.err_vs_transported_target,
            "err_vs_target": self.err_vs_target,
            "stage_bound": self.bound,
            "stage_energy": self.stage_energy,
            "cumulative_energy": self.cumulative_energy,
        }


@dataclass
class SteeringReport:
    """Per-stage log of a dyadic steering run.

    ``c_fit`` is the smallest ``c`` with ``stage_energy_n <= c tau_n`` for
    ``n >= 2``; ``energy_bound`` is ``stage_energy_1 + c_fit T / 2``.
    ``C_run`` is ``max_n (||eta|| + ||x_{n-1}||)``, the scale used for
    discretisation slack.
    """

    stages: list
    stop_reason: str
    terminal_error: float
    terminal_relative_error: float
    target_norm: float
    K: float
    M: float
    C_run: float
    c_fit: float
    energy_bound: float
    eps: float
    spacing: float
    target_check: TargetDiagnostics = None
    notes: list = field(default_factory=list)

    @property
    def total_energy(self):
        return self.stages[-1].cumulative_energy if self.stages else 0.0

    def rows(self):
        return [s.as_row() for s in self.stages]


def steer_semilinear(
    sys,
    xi,
    eta,
    f,
    eps=None,
    n_stages=12,
    n_time_steps_per_stage=256,
    stop_tol=1e-8,
    max_picard=50,
    tol_picard=1e-10,
):
    """Run the dyadic steering construction.

    Returns
    -------
    control : ControlSignal
    trajectory : Trajectory
    report : SteeringReport

    Stops after ``n_stages`` stages, once ``||L x_n - L eta|| <= stop_tol``,
    or before a stage whose length falls under two grid cells.
    """
    grid = xi.grid
    eps = grid.snap_eps(sys.eps if eps is None else eps)
    check = validate_target(sys, eta, eps)
    if not check.passed:
        logger.warning("target outside the generator domain: %s", "; ".join(check.messages))
    schedule = dyadic_schedule(sys.T, n_stages)
    K = semigroup_bound(sys)
    M = f.norm_bound(sys.is_pair)
    floor = 2.0 * grid.spacing
    eta_norm = norm(eta)

    control = ControlSignal(sys, grid)
    parts = []
    stages = []
    x = xi
    cumulative = 0.0
    stop_reason = "max_stages"
    for n in range(1, schedule.n_stages + 1):
        tau = schedule.taus[n - 1]
        if tau < floor:
            stop_reason = "grid_floor"
            break
        t0, t1 = schedule.start(n), schedule.times[n - 1]
        seg = steering_segment(sys, x, eta, t0, t1, eps, transport_target=True)
        control = control.extend(seg)
        stage_control = ControlSignal(sys, grid, (seg,))
        try:
            traj = solve_mild(
                sys, x, stage_control, f, t0, t1, n_time_steps_per_stage, max_picard, tol_picard
            )
        except ConvergenceError as exc:
            exc.stage = n
            raise
        parts.append(traj)
        x_prev_norm = norm(x)
        x = traj.final
        energy = control_energy(stage_control, n_time_steps_per_stage)
        cumulative += energy
        record = StageRecord(
            n=n,
            tau=tau,
            t_n=t1,
            err_vs_transported_target=partial_error(x, apply_semigroup(sys, tau, eta), eps),
            err_vs_target=partial_error(x, eta, eps),
            bound=stage_error_bound(sys, eta, f, tau, K),
            stage_energy=energy,
            identity_energy=seg.identity_energy,
            cumulative_energy=cumulative,
            picard_iterations=traj.picard_iterations,
            state_norm_before=x_prev_norm,
        )
        stages.append(record)
        logger.debug("stage %d: tau=%.3e err=%.3e", n, tau, record.err_vs_target)
        if record.err_vs_target <= stop_tol:
            stop_reason = "stop_tol"
            break

    if not stages:
        raise ParameterError(
            f"no stage ran: tau_1 = {schedule.taus[0]} is below the grid floor {floor}"
        )
    target_norm = norm(restrict(eta, eps))
    terminal = stages[-1].err_vs_target
    later = [s.stage_energy / s.tau for s in stages[1:]]
    c_fit = max(later) if later else math.nan
    energy_bound = stages[0].stage_energy + (c_fit * sys.T / 2 if later else 0.0)
    report = SteeringReport(
        stages=stages,
        stop_reason=stop_reason,
        terminal_error=terminal,
        terminal_relative_error=terminal / target_norm if target_norm > 0 else math.inf,
        target_norm=target_norm,
        K=K,
        M=M,
        C_run=max(eta_norm + s.state_norm_before for s in stages),
        c_fit=c_fit,
        energy_bound=energy_bound,
        eps=eps,
        spacing=grid.spacing,
        target_check=check,
    )
    return control, Trajectory.concatenate(parts), report
