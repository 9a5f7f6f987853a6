"""Partial exact steering of monotubular and two-stream heat-exchanger models.

The state lives on a uniform grid of [0, 1]; semigroups and Gramians are
applied in closed form; controls are minimum-norm and evaluated on demand.
"""

from .errors import (
    ConfigError,
    ConvergenceError,
    ExsteerError,
    GridMismatchError,
    KindMismatchError,
    ParameterError,
    RegistryError,
    RunError,
    SingularityError,
)
from .grid import (
    Grid,
    GridFunction,
    PairFunction,
    RestrictedFunction,
    embed,
    inner_product,
    norm,
    project,
    restrict,
)
from .semigroup import (
    Monotubular,
    TwoStream,
    apply_semigroup,
    coupling_exp,
    coupling_generator,
    semigroup_bound,
    translate_left,
    translate_right,
)
from .gramian import (
    CoercivityReport,
    apply_gramian,
    apply_partial_gramian,
    apply_partial_gramian_inverse,
    coercivity_report,
    condition_e_cap,
    gramian_multiplier,
    gramian_oracle,
    noncoercivity_bound,
    noncoercivity_demo,
    partial_gramian_min_eig,
    two_stream_uv,
)
from .semilinear import (
    Nonlinearity,
    Trajectory,
    available_nonlinearities,
    check_nonlinearity,
    duhamel_linear,
    eval_nonlinearity,
    get_nonlinearity,
    register_nonlinearity,
    solve_mild,
)
from .steering import (
    ControlSegment,
    ControlSignal,
    HeldSegment,
    control_energy,
    partial_error,
    steering_segment,
    support_norm_sq,
    synthesize_linear_control,
)
from .dyadic import (
    DyadicSchedule,
    StageRecord,
    SteeringReport,
    TargetDiagnostics,
    dyadic_schedule,
    stage_error_bound,
    steer_semilinear,
    validate_target,
)
from .config import FunctionSpec, ScenarioConfig, build_function, load_config, parse_config, serialize_config
from .runner import RunReport, Table, export_csv, run_scenario

__version__ = "0.1.0"
