"""Flat ``key = value`` scenario documents.

One assignment per line, dotted section prefixes, ``#`` starts a comment::

    command = steer-linear
    system.kind = monotubular
    system.a = 1.0
    system.b = 1.0
    target.kind = bump
    target.center = 0.5
    target.width = 0.8

Validation collects every problem before raising :class:`ConfigError`.
"""

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError, ParameterError
from .grid import GridFunction, PairFunction
from .semigroup import Monotubular, TwoStream
from .semilinear import available_nonlinearities, get_nonlinearity

__all__ = [
    "COMMANDS",
    "FunctionSpec",
    "ScenarioConfig",
    "parse_config",
    "serialize_config",
    "load_config",
    "build_function",
]

COMMANDS = (
    "gramian-report",
    "check-conditions",
    "steer-linear",
    "steer-semilinear",
    "demo-noncoercivity",
    "selftest",
)

_SYSTEM_PARAMS = {"monotubular": ("a", "b"), "two_stream": ("h1", "h2", "b1", "b2")}

# preset name -> {param: (type, default)}; default None means required
_PRESETS = {
    "zero": {},
    "const": {"value": (float, None)},
    "sine": {"k": (float, None), "amplitude": (float, 1.0)},
    "bump": {"center": (float, None), "width": (float, None), "amplitude": (float, 1.0)},
    "poly": {"coeffs": ("floats", None)},
    "samples": {"path": (str, None)},
}

_NUMERIC = {
    "n_time_steps": (int, 256),
    "n_stages": (int, 12),
    "stop_tol": (float, 1e-8),
    "max_picard": (int, 50),
    "tol_picard": (float, 1e-10),
    "tau": (float, 0.0),
    "transport_target": (bool, True),
    "deltas": ("floats", (0.1, 0.05, 0.025, 0.0125)),
    "support": (str, "both"),
    "n_t": (int, 50),
    "seed": (int, 0),
}


@dataclass(frozen=True)
class FunctionSpec:
    """A preset from the function library with its parameters."""

    kind: str = "zero"
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ScenarioConfig:
    command: str = None
    system_kind: str = "monotubular"
    system_params: dict = field(default_factory=dict)
    T: float = 1.0
    eps: float = 0.1
    n_cells: int = 1024
    initial: tuple = (FunctionSpec(),)
    target: tuple = (FunctionSpec(),)
    nonlinearity: str = "zero"
    nonlinearity_params: dict = field(default_factory=dict)
    numeric: dict = field(default_factory=lambda: {k: v[1] for k, v in _NUMERIC.items()})
    output_dir: str = "exsteer_out"

    def system(self):
        if self.system_kind == "monotubular":
            return Monotubular(T=self.T, eps=self.eps, **self.system_params)
        return TwoStream(T=self.T, eps=self.eps, **self.system_params)

    def f(self):
        return get_nonlinearity(self.nonlinearity, **self.nonlinearity_params)

    def with_overrides(self, **changes):
        return replace(self, **changes)


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (tuple, list)):
        return ", ".join(_fmt(float(v)) for v in value)
    return str(value)


def _convert(kind, raw):
    if kind is float:
        val = float(raw)
        if not math.isfinite(val):
            raise ValueError("must be finite")
        return val
    if kind is int:
        val = float(raw)
        if val != int(val):
            raise ValueError("must be an integer")
        return int(val)
    if kind is bool:
        low = raw.strip().lower()
        if low in ("true", "yes", "1", "on"):
            return True
        if low in ("false", "no", "0", "off"):
            return False
        raise ValueError("must be true or false")
    if kind == "floats":
        return tuple(float(p) for p in raw.split(",") if p.strip())
    return raw.strip()


def _split_lines(document):
    entries, problems = {}, []
    for lineno, line in enumerate(document.splitlines(), 1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            problems.append(f"line {lineno}: expected 'key = value', got {text!r}")
            continue
        key, value = (p.strip() for p in text.split("=", 1))
        if not key:
            problems.append(f"line {lineno}: empty key")
        elif key in entries:
            problems.append(f"line {lineno}: duplicate key {key!r}")
        else:
            entries[key] = value
    return entries, problems


def _take(entries, key, kind, default, problems, required=False):
    if key not in entries:
        if required:
            problems.append(f"missing key {key!r}")
        return default
    raw = entries.pop(key)
    try:
        return _convert(kind, raw)
    except ValueError as exc:
        problems.append(f"{key}: cannot read {raw!r} ({exc})")
        return default


def _check_range(problems, key, value, ok, admissible):
    if value is not None and not ok(value):
        problems.append(f"{key} = {value} out of range; admissible {admissible}")


def _parse_function(entries, prefix, problems, fallback=None):
    if f"{prefix}.kind" not in entries:
        leftover = [k for k in entries if k.startswith(prefix + ".")]
        for k in leftover:
            entries.pop(k)
            problems.append(f"{k}: parameters given without {prefix}.kind")
        return fallback
    kind = entries.pop(f"{prefix}.kind")
    if kind not in _PRESETS:
        problems.append(f"{prefix}.kind: unknown preset {kind!r}; known: {', '.join(_PRESETS)}")
        for k in [k for k in entries if k.startswith(prefix + ".")]:
            entries.pop(k)
        return FunctionSpec()
    params = {}
    for name, (ptype, default) in _PRESETS[kind].items():
        val = _take(entries, f"{prefix}.{name}", ptype, default, problems, required=default is None)
        if val is not None:
            params[name] = val
    if kind == "bump":
        _check_range(problems, f"{prefix}.width", params.get("width"), lambda w: w > 0, "(0, inf)")
    return FunctionSpec(kind, params)


def parse_config(document):
    """Parse and validate a scenario document.

    Raises
    ------
    ConfigError
        Listing every problem found: unknown keys, missing keys, unreadable
        values and range violations.
    """
    entries, problems = _split_lines(document)
    defaults = ScenarioConfig()

    command = _take(entries, "command", str, None, problems)
    if command is not None and command not in COMMANDS:
        problems.append(f"command: unknown command {command!r}; known: {', '.join(COMMANDS)}")

    kind = _take(entries, "system.kind", str, "monotubular", problems, required=True)
    if kind not in _SYSTEM_PARAMS:
        problems.append(f"system.kind: unknown system {kind!r}; known: monotubular, two_stream")
        kind = "monotubular"
    sys_params = {}
    for name in _SYSTEM_PARAMS[kind]:
        val = _take(entries, f"system.{name}", float, None, problems, required=True)
        if val is not None:
            sys_params[name] = val
    for name in ("a", "h1", "h2"):
        _check_range(problems, f"system.{name}", sys_params.get(name), lambda v: v > 0, "(0, inf)")
    for name in ("b", "b1", "b2"):
        _check_range(problems, f"system.{name}", sys_params.get(name), lambda v: v != 0, "nonzero")

    T = _take(entries, "system.T", float, defaults.T, problems)
    _check_range(problems, "system.T", T, lambda v: v > 0, "(0, inf)")
    eps = _take(entries, "system.eps", float, defaults.eps, problems)
    _check_range(problems, "system.eps", eps, lambda v: 0 < v < 0.5, "(0, 1/2)")
    n_cells = _take(entries, "grid.n_cells", int, defaults.n_cells, problems)
    _check_range(problems, "grid.n_cells", n_cells, lambda v: v >= 8, "[8, inf)")
    if eps is not None and n_cells is not None and 0 < eps < 0.5 and n_cells >= 8:
        k = round(eps * n_cells)
        if k < 1 or 2 * k > n_cells - 2:
            problems.append(
                f"system.eps = {eps} snaps outside [1/n_cells, 1/2 - 1/n_cells] for n_cells = {n_cells}"
            )

    initial = _parse_function(entries, "initial", problems, FunctionSpec())
    target = _parse_function(entries, "target", problems, FunctionSpec())
    initials, targets = (initial,), (target,)
    if kind == "two_stream":
        initials = (initial, _parse_function(entries, "initial2", problems, initial))
        targets = (target, _parse_function(entries, "target2", problems, target))

    nl_name = _take(entries, "nonlinearity.name", str, "zero", problems)
    nl_params = {}
    for key in [k for k in entries if k.startswith("nonlinearity.")]:
        val = _take(entries, key, float, None, problems)
        if val is not None:
            nl_params[key.split(".", 1)[1]] = val
    if nl_name not in available_nonlinearities():
        problems.append(
            f"nonlinearity.name: unknown {nl_name!r}; known: {', '.join(available_nonlinearities())}"
        )
    else:
        try:
            get_nonlinearity(nl_name, **nl_params)
        except ParameterError as exc:
            problems.append(f"nonlinearity: {exc}")

    numeric = {}
    for name, (ntype, default) in _NUMERIC.items():
        numeric[name] = _take(entries, f"numeric.{name}", ntype, default, problems)
    _check_range(problems, "numeric.n_time_steps", numeric["n_time_steps"], lambda v: v >= 2, "[2, inf)")
    _check_range(problems, "numeric.n_stages", numeric["n_stages"], lambda v: v >= 1, "[1, inf)")
    _check_range(problems, "numeric.stop_tol", numeric["stop_tol"], lambda v: v >= 0, "[0, inf)")
    _check_range(problems, "numeric.max_picard", numeric["max_picard"], lambda v: v >= 1, "[1, inf)")
    _check_range(problems, "numeric.tol_picard", numeric["tol_picard"], lambda v: v > 0, "(0, inf)")
    _check_range(problems, "numeric.n_t", numeric["n_t"], lambda v: v >= 1, "[1, inf)")
    if T is not None:
        _check_range(problems, "numeric.tau", numeric["tau"], lambda v: 0 <= v < T, f"[0, {T})")
    _check_range(
        problems, "numeric.deltas", numeric["deltas"],
        lambda v: len(v) > 0 and all(0 < d < 0.5 for d in v), "nonempty, each in (0, 1/2)",
    )
    _check_range(
        problems, "numeric.support", numeric["support"], lambda v: v in ("both", "inflow"),
        "{both, inflow}",
    )

    output_dir = _take(entries, "output.dir", str, defaults.output_dir, problems)

    for key in sorted(entries):
        problems.append(f"unknown key {key!r}")
    if problems:
        raise ConfigError(problems)
    return ScenarioConfig(
        command=command,
        system_kind=kind,
        system_params=sys_params,
        T=T,
        eps=eps,
        n_cells=n_cells,
        initial=initials,
        target=targets,
        nonlinearity=nl_name,
        nonlinearity_params=nl_params,
        numeric=numeric,
        output_dir=output_dir,
    )


def _function_lines(prefix, spec):
    lines = [f"{prefix}.kind = {spec.kind}"]
    for name in _PRESETS[spec.kind]:
        if name in spec.params:
            lines.append(f"{prefix}.{name} = {_fmt(spec.params[name])}")
    return lines


def serialize_config(cfg):
    """Canonical document for ``cfg``; ``parse_config`` inverts it exactly."""
    lines = []
    if cfg.command is not None:
        lines.append(f"command = {cfg.command}")
    lines.append(f"system.kind = {cfg.system_kind}")
    for name in _SYSTEM_PARAMS[cfg.system_kind]:
        lines.append(f"system.{name} = {_fmt(cfg.system_params[name])}")
    lines.append(f"system.T = {_fmt(cfg.T)}")
    lines.append(f"system.eps = {_fmt(cfg.eps)}")
    lines.append(f"grid.n_cells = {cfg.n_cells}")
    lines += _function_lines("initial", cfg.initial[0])
    lines += _function_lines("target", cfg.target[0])
    if cfg.system_kind == "two_stream":
        lines += _function_lines("initial2", cfg.initial[1])
        lines += _function_lines("target2", cfg.target[1])
    lines.append(f"nonlinearity.name = {cfg.nonlinearity}")
    for name in sorted(cfg.nonlinearity_params):
        lines.append(f"nonlinearity.{name} = {_fmt(cfg.nonlinearity_params[name])}")
    for name in _NUMERIC:
        lines.append(f"numeric.{name} = {_fmt(cfg.numeric[name])}")
    lines.append(f"output.dir = {cfg.output_dir}")
    return "\n".join(lines) + "\n"


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def _read_samples(path):
    thetas, values = [], []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().startswith("#"):
                continue
            try:
                th, val = float(row[0]), float(row[1])
            except (ValueError, IndexError):
                if thetas:
                    raise ParameterError(f"{path}: unreadable row {row!r}") from None
                continue  # header
            thetas.append(th)
            values.append(val)
    if len(thetas) < 2:
        raise ParameterError(f"{path}: need at least two (theta, value) rows")
    order = np.argsort(thetas)
    return np.asarray(thetas)[order], np.asarray(values)[order]


def _preset_values(spec, theta):
    p = spec.params
    if spec.kind == "zero":
        return np.zeros_like(theta)
    if spec.kind == "const":
        return np.full_like(theta, p["value"])
    if spec.kind == "sine":
        return p.get("amplitude", 1.0) * np.sin(p["k"] * np.pi * theta)
    if spec.kind == "bump":
        z = (theta - p["center"]) / (0.5 * p["width"])
        out = np.zeros_like(theta)
        inside = np.abs(z) < 1
        out[inside] = p.get("amplitude", 1.0) * np.cos(0.5 * np.pi * z[inside]) ** 2
        return out
    if spec.kind == "poly":
        return np.polynomial.polynomial.polyval(theta, p["coeffs"])
    if spec.kind == "samples":
        th, vals = _read_samples(p["path"])
        return np.interp(theta, th, vals)
    raise ParameterError(f"unknown function preset {spec.kind!r}")


def build_function(specs, grid):
    """GridFunction (one spec) or PairFunction (two specs) sampled on ``grid``."""
    if len(specs) == 1:
        return GridFunction(grid, _preset_values(specs[0], grid.nodes))
    return PairFunction(grid, np.stack([_preset_values(s, grid.nodes) for s in specs]))
