"""Scenario execution and CSV export.

:func:`run_scenario` dispatches a :class:`~exsteer.config.ScenarioConfig`
to the library, collects tables and pass/fail flags in a :class:`RunReport`
and writes the CSV artifacts. Everything written to disk is a pure
function of the configuration; wall-clock time only lives in the report.
"""

import hashlib
import logging
import math
import os
import tempfile
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .config import build_function, serialize_config
from .errors import ExsteerError, RunError
from .gramian import coercivity_report, noncoercivity_bound, noncoercivity_demo
from .grid import Grid, norm, project, restrict
from .dyadic import stage_error_bound, steer_semilinear
from .properties import run_property_suite
from .semigroup import apply_semigroup, semigroup_bound, translate_left
from .semilinear import get_nonlinearity, solve_mild
from .steering import control_energy, partial_error, synthesize_linear_control

__all__ = ["Table", "RunReport", "run_scenario", "export_csv", "format_number"]

logger = logging.getLogger(__name__)

STAGE_COLUMNS = (
    "n",
    "tau_n",
    "t_n",
    "err_vs_transported_target",
    "err_vs_target",
    "stage_bound",
    "stage_energy",
    "cumulative_energy",
)
COERCIVITY_COLUMNS = ("t", "c_min", "inv_norm", "t_times_inv_norm", "bound", "pass")


@dataclass
class Table:
    """Rows sharing one column layout, plus the inputs that produced them."""

    columns: tuple
    rows: list
    inputs: dict = field(default_factory=dict)

    def column(self, name):
        return [row[name] for row in self.rows]


@dataclass
class RunReport:
    command: str
    config_hash: str
    tables: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)
    wall_clock: float = 0.0
    notes: list = field(default_factory=list)
    files: list = field(default_factory=list)

    @property
    def ok(self):
        return all(self.flags.values())

    @property
    def exit_status(self):
        return 0 if self.ok else 1


def format_number(value):
    """CSV rendering: 17 significant digits for reals, plain ints and booleans."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    return "%.17g" % float(value)


def _write_atomic(path, text):
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def export_csv(report, directory):
    """Write every table of ``report`` as ``<name>.csv``; returns the paths."""
    directory = Path(directory)
    try:
        directory.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {directory}: {exc}") from exc
    paths = []
    for name in sorted(report.tables):
        table = report.tables[name]
        lines = [",".join(table.columns)]
        for row in table.rows:
            lines.append(",".join(format_number(row[c]) for c in table.columns))
        path = directory / f"{name}.csv"
        try:
            _write_atomic(path, "\n".join(lines) + "\n")
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc}") from exc
        paths.append(path)
    return paths


def config_hash(cfg):
    return hashlib.sha256(serialize_config(cfg).encode("utf-8")).hexdigest()


def _system_inputs(cfg):
    return {"system": cfg.system_kind, **cfg.system_params, "T": cfg.T, "eps": cfg.eps, "n_cells": cfg.n_cells}


def _coercivity_table(cfg, sys, grid, report):
    T = cfg.T
    ts = np.geomspace(T * 1e-3, T, cfg.numeric["n_t"]) if cfg.numeric["n_t"] > 1 else np.array([T])
    rows = [coercivity_report(sys, float(t), cfg.eps, grid) for t in ts]
    report.tables["coercivity"] = Table(
        COERCIVITY_COLUMNS, [r.as_row() for r in rows], {**_system_inputs(cfg), "eps_snapped": rows[0].eps}
    )
    report.flags["condition_E"] = all(r.passed for r in rows)
    if not all(r.small_time_constant_holds for r in rows):
        worst = max(r.product for r in rows)
        report.notes.append(
            f"t ||Q_L^-1|| reaches {worst:.6g}, above the small-time value {rows[0].small_time_constant:.6g}"
        )
    return rows


def _gramian_report(cfg, sys, grid, report):
    _coercivity_table(cfg, sys, grid, report)


def _check_conditions(cfg, sys, grid, report):
    _coercivity_table(cfg, sys, grid, report)
    x = build_function(cfg.initial, grid)
    eps = grid.snap_eps(cfg.eps)
    k_eps = round(eps * grid.n_cells)
    shifts = sorted({max(1, k_eps >> j) for j in range(1, 6)} | {k_eps - 1})
    rows = []
    px = project(x, eps)
    scale = max(norm(px), 1e-300)
    for k in shifts:
        tau = k / grid.n_cells
        defect = norm(project(translate_left(x, tau), eps) - px)
        defect_s = norm(project(apply_semigroup(sys, tau, x), eps) - px)
        rows.append(
            {
                "tau": tau,
                "defect_translation": defect,
                "defect_semigroup": defect_s,
                "relative_defect": defect / scale,
                "exact": defect == 0.0,
            }
        )
    report.tables["condition_f"] = Table(
        ("tau", "defect_translation", "defect_semigroup", "relative_defect", "exact"),
        rows,
        {**_system_inputs(cfg), "state": "initial"},
    )
    report.flags["condition_F"] = all(r["exact"] for r in rows)


def _terminal_table(cfg, grid, xT, eta, eps):
    pair = cfg.system_kind == "two_stream"
    inside = np.zeros(grid.n_nodes, dtype=bool)
    inside[grid.restricted_slice(eps)] = True
    err = np.max(np.abs(np.atleast_2d(xT.values - eta.values)), axis=0)
    err = np.where(inside, err, math.nan)
    xv, ev = np.atleast_2d(xT.values), np.atleast_2d(eta.values)
    columns = ("theta", "x_T", "x2_T", "eta", "eta2", "abs_err_inside_eps") if pair else (
        "theta", "x_T", "eta", "abs_err_inside_eps"
    )
    rows = []
    for i, th in enumerate(grid.nodes):
        row = {"theta": th, "x_T": xv[0, i], "eta": ev[0, i], "abs_err_inside_eps": err[i]}
        if pair:
            row["x2_T"], row["eta2"] = xv[1, i], ev[1, i]
        rows.append(row)
    return Table(columns, rows, {**_system_inputs(cfg), "eps_snapped": eps})


def _steer_linear(cfg, sys, grid, report):
    num = cfg.numeric
    xi, eta = build_function(cfg.initial, grid), build_function(cfg.target, grid)
    eps = grid.snap_eps(cfg.eps)
    tau, T = num["tau"], cfg.T
    if cfg.nonlinearity != "zero":
        report.notes.append(f"steer-linear ignores nonlinearity {cfg.nonlinearity!r}")
    u = synthesize_linear_control(sys, xi, eta, tau, T, eps, transport_target=num["transport_target"])
    seg = u.segments[0]
    traj = solve_mild(sys, xi, u, get_nonlinearity("zero"), tau, T, num["n_time_steps"], num["max_picard"], num["tol_picard"])
    xT = traj.final
    transported = apply_semigroup(sys, T - tau, eta)
    aim = transported if num["transport_target"] else eta
    energy = control_energy(u, num["n_time_steps"])
    aim_norm = norm(restrict(aim, eps))
    err = partial_error(xT, aim, eps)
    row = {
        "n": 1,
        "tau_n": T - tau,
        "t_n": T,
        "err_vs_transported_target": partial_error(xT, transported, eps),
        "err_vs_target": partial_error(xT, eta, eps),
        "stage_bound": stage_error_bound(sys, eta, get_nonlinearity("zero"), T - tau),
        "stage_energy": energy,
        "cumulative_energy": energy,
    }
    inputs = {**_system_inputs(cfg), "eps_snapped": eps, "tau": tau, "transport_target": num["transport_target"]}
    report.tables["stages"] = Table(STAGE_COLUMNS, [row], inputs)
    report.tables["terminal_state"] = _terminal_table(cfg, grid, xT, eta, eps)
    identity = seg.identity_energy
    report.flags["energy_identity"] = abs(energy - identity) <= 1e-4 * max(abs(identity), 1e-300) or energy == identity == 0.0
    if aim_norm > 0:
        report.flags["steering_error"] = err / aim_norm <= 5e-3
    else:
        report.notes.append("steered target vanishes on [eps, 1 - eps]; relative error undefined")
        report.flags["steering_error"] = err <= 1e-12
    report.notes.append(f"relative steering error {err / aim_norm if aim_norm else math.nan:.6g}")


def _steer_semilinear(cfg, sys, grid, report):
    num = cfg.numeric
    xi, eta = build_function(cfg.initial, grid), build_function(cfg.target, grid)
    f = cfg.f()
    _, traj, rep = steer_semilinear(
        sys, xi, eta, f, cfg.eps, num["n_stages"], num["n_time_steps"], num["stop_tol"],
        num["max_picard"], num["tol_picard"],
    )
    inputs = {
        **_system_inputs(cfg), "eps_snapped": rep.eps, "nonlinearity": cfg.nonlinearity,
        **cfg.nonlinearity_params, "K": rep.K, "M": rep.M, "C_run": rep.C_run, "c_fit": rep.c_fit,
        "stop_reason": rep.stop_reason,
    }
    report.tables["stages"] = Table(STAGE_COLUMNS, rep.rows(), inputs)
    report.tables["terminal_state"] = _terminal_table(cfg, grid, traj.final, eta, rep.eps)
    slack = 10 * grid.spacing * rep.C_run
    report.flags["stage_bound"] = all(s.err_vs_target <= s.bound + slack for s in rep.stages)
    report.flags["energy_finite"] = math.isfinite(rep.total_energy)
    if not rep.target_check.passed:
        report.notes.extend(rep.target_check.messages)
    report.notes.append(
        f"stop_reason={rep.stop_reason} stages={len(rep.stages)} "
        f"terminal_relative_error={rep.terminal_relative_error:.6g} C_run={rep.C_run:.6g} c_fit={rep.c_fit:.6g}"
    )


def _demo_noncoercivity(cfg, sys, grid, report):
    num = cfg.numeric
    deltas = sorted(num["deltas"], reverse=True)
    support = num["support"]
    rows = []
    for delta in deltas:
        q = noncoercivity_demo(sys, cfg.T, delta, grid, support)
        b2 = float(np.max(sys.control_gains**2))
        bound = b2 * delta if support == "both" else noncoercivity_bound(sys, delta)
        rows.append({"delta": delta, "quotient": q, "bound": bound, "within_bound": q <= bound + 1e-12})
    report.tables["noncoercivity"] = Table(
        ("delta", "quotient", "bound", "within_bound"), rows, {**_system_inputs(cfg), "t": cfg.T, "support": support}
    )
    qs = [r["quotient"] for r in rows]
    report.flags["monotone_decreasing"] = all(b < a for a, b in zip(qs, qs[1:]))
    report.flags["within_bound"] = all(r["within_bound"] for r in rows)


def _selftest(cfg, sys, grid, report, seed):
    results, seconds = run_property_suite(n_cells=256, seed=seed)
    report.tables["selftest"] = Table(
        ("check", "pass", "worst", "tolerance", "cases"),
        [r.as_row() for r in results],
        {"n_cells": 256, "seed": seed},
    )
    report.flags["property_suite"] = all(r.passed for r in results)
    report.flags["selftest_under_60s"] = seconds < 60.0
    report.notes.append(f"property suite took {seconds:.2f} s")


_DISPATCH = {
    "gramian-report": _gramian_report,
    "check-conditions": _check_conditions,
    "steer-linear": _steer_linear,
    "steer-semilinear": _steer_semilinear,
    "demo-noncoercivity": _demo_noncoercivity,
}


def run_scenario(cfg, out_dir=None, command=None, seed=None, write=True):
    """Execute ``cfg`` and (unless ``write`` is false) export its tables.

    Parameters
    ----------
    cfg : ScenarioConfig
    out_dir : path, optional
        Overrides ``cfg.output_dir``.
    command : str, optional
        Overrides ``cfg.command``.
    seed : int, optional
        Overrides ``numeric.seed``; only the selftest draws random numbers.

    Raises
    ------
    RunError
        Wrapping any library error, tagged with the command name.
    """
    command = command or cfg.command
    if command is None:
        raise RunError("run", ExsteerError("no command given in the config or on the command line"))
    if seed is not None:
        cfg = replace(cfg, numeric={**cfg.numeric, "seed": int(seed)})
    cfg = replace(cfg, command=command)
    report = RunReport(command, config_hash(cfg))
    start = time.perf_counter()
    try:
        grid = Grid(cfg.n_cells)
        sys = cfg.system()
        if command == "selftest":
            _selftest(cfg, sys, grid, report, cfg.numeric["seed"])
        else:
            _DISPATCH[command](cfg, sys, grid, report)
        if semigroup_bound(sys) > 1.0:
            report.notes.append(f"semigroup bound K = {semigroup_bound(sys):.6g} > 1 (asymmetric coupling)")
    except (ExsteerError, ValueError, ArithmeticError) as exc:
        raise RunError(command, exc) from exc
    report.wall_clock = time.perf_counter() - start
    if write:
        report.files = export_csv(report, out_dir if out_dir is not None else cfg.output_dir)
    for note in report.notes:
        logger.info("%s: %s", command, note)
    return report
