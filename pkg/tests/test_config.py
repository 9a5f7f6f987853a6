import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from exsteer import ConfigError, Grid, build_function, parse_config, serialize_config
from exsteer.config import FunctionSpec, ScenarioConfig

MINIMAL = """
command = steer-linear
system.kind = monotubular
system.a = 1.0
system.b = 1.0
target.kind = bump
target.center = 0.5
target.width = 0.8
"""

TWO_STREAM = """
system.kind = two_stream
system.h1 = 0.5
system.h2 = 0.5
system.b1 = 1.0
system.b2 = 1.0
"""


def test_minimal_document_fills_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.n_cells == 1024
    assert cfg.numeric["n_time_steps"] == 256
    assert cfg.numeric["max_picard"] == 50 and cfg.numeric["tol_picard"] == 1e-10
    assert cfg.T == 1.0 and cfg.eps == 0.1
    assert cfg.target == (FunctionSpec("bump", {"center": 0.5, "width": 0.8, "amplitude": 1.0}),)
    assert cfg.initial == (FunctionSpec("zero", {}),)
    assert cfg.system().a == 1.0


def test_eps_range_error():
    with pytest.raises(ConfigError) as info:
        parse_config(MINIMAL + "system.eps = 0.6\n")
    assert any("(0, 1/2)" in p for p in info.value.problems)


def test_missing_h2():
    doc = TWO_STREAM.replace("system.h2 = 0.5\n", "")
    with pytest.raises(ConfigError) as info:
        parse_config(doc)
    assert info.value.problems == ["missing key 'system.h2'"]


def test_all_problems_reported():
    doc = MINIMAL + "system.eps = 0.9\ngrid.n_cells = 4\nbogus.key = 1\nnumeric.max_picard = x\n"
    with pytest.raises(ConfigError) as info:
        parse_config(doc)
    problems = info.value.problems
    assert len(problems) == 4
    assert any("'bogus.key'" in p for p in problems)
    assert any("grid.n_cells" in p for p in problems)


def test_unknown_preset_and_command():
    with pytest.raises(ConfigError) as info:
        parse_config(MINIMAL.replace("steer-linear", "fly") + "initial.kind = wave\n")
    text = str(info.value)
    assert "unknown command 'fly'" in text and "unknown preset 'wave'" in text


def test_duplicates_and_syntax():
    with pytest.raises(ConfigError) as info:
        parse_config(MINIMAL + "system.a = 2.0\nnot an assignment\n")
    assert any("duplicate key 'system.a'" in p for p in info.value.problems)
    assert any("expected 'key = value'" in p for p in info.value.problems)


def test_comments_and_blank_lines():
    cfg = parse_config("# header\n\n" + MINIMAL.replace("system.a = 1.0", "system.a = 2.0  # hot"))
    assert cfg.system_params["a"] == 2.0


def test_nonlinearity_block():
    cfg = parse_config(MINIMAL + "nonlinearity.name = sat_tanh\nnonlinearity.gain = 0.2\n")
    assert cfg.f().bound == 0.2
    with pytest.raises(ConfigError):
        parse_config(MINIMAL + "nonlinearity.name = cubic\n")
    with pytest.raises(ConfigError):
        parse_config(MINIMAL + "nonlinearity.name = sat_tanh\nnonlinearity.slope = 2\n")


def test_second_component_defaults_to_first():
    cfg = parse_config(TWO_STREAM + "initial.kind = sine\ninitial.k = 2\ntarget2.kind = const\ntarget2.value = 0.5\n")
    assert cfg.initial[0] == cfg.initial[1]
    assert cfg.target == (FunctionSpec("zero", {}), FunctionSpec("const", {"value": 0.5}))


@pytest.mark.parametrize(
    "lines,expected",
    [
        ("x.kind = zero", lambda t: 0 * t),
        ("x.kind = const\nx.value = 2.5", lambda t: 2.5 + 0 * t),
        ("x.kind = sine\nx.k = 3\nx.amplitude = 2", lambda t: 2 * np.sin(3 * np.pi * t)),
        ("x.kind = poly\nx.coeffs = 1, -2, 3", lambda t: 1 - 2 * t + 3 * t**2),
    ],
)
def test_presets(lines, expected):
    cfg = parse_config(MINIMAL + lines.replace("x.", "initial.") + "\n")
    g = Grid(32)
    np.testing.assert_allclose(build_function(cfg.initial, g).values, expected(g.nodes), atol=1e-14)


def test_bump_preset():
    cfg = parse_config(MINIMAL)
    g = Grid(40)
    vals = build_function(cfg.target, g).values
    assert vals[20] == 1.0
    assert np.all(vals[g.nodes <= 0.1] == 0) and np.all(vals[g.nodes >= 0.9] == 0)


def test_samples_preset(tmp_path):
    path = tmp_path / "profile.csv"
    path.write_text("theta,value\n0,0\n0.5,1\n1,0\n")
    cfg = parse_config(MINIMAL + f"initial.kind = samples\ninitial.path = {path}\n")
    g = Grid(4)
    np.testing.assert_allclose(build_function(cfg.initial, g).values, [0, 0.5, 1, 0.5, 0])


def test_pair_function_built(sym=None):
    cfg = parse_config(TWO_STREAM + "initial.kind = sine\ninitial.k = 1\ninitial2.kind = zero\n")
    x = build_function(cfg.initial, Grid(16))
    assert x.values.shape == (2, 17) and np.all(x.x2.values == 0)


@pytest.mark.parametrize("doc", [MINIMAL, TWO_STREAM + "target2.kind = sine\ntarget2.k = 2\n"])
def test_round_trip(doc):
    cfg = parse_config(doc)
    assert parse_config(serialize_config(cfg)) == cfg
    assert serialize_config(parse_config(serialize_config(cfg))) == serialize_config(cfg)


finite = st.floats(-10, 10, allow_nan=False).filter(lambda v: v != 0)


@settings(max_examples=50, deadline=None)
@given(
    a=st.floats(1e-3, 10),
    b=finite,
    eps=st.floats(0.02, 0.45),
    n=st.integers(64, 4096),
    gain=st.floats(0, 1),
    k=st.floats(0.5, 8),
    deltas=st.lists(st.floats(0.001, 0.49), min_size=1, max_size=5),
    transport=st.booleans(),
)
def test_round_trip_property(a, b, eps, n, gain, k, deltas, transport):
    cfg = ScenarioConfig(
        command="steer-semilinear",
        system_params={"a": a, "b": b},
        eps=eps,
        n_cells=n,
        initial=(FunctionSpec("sine", {"k": k, "amplitude": 1.0}),),
        nonlinearity="sat_tanh",
        nonlinearity_params={"gain": gain},
    )
    cfg = cfg.with_overrides(numeric={**cfg.numeric, "deltas": tuple(deltas), "transport_target": transport})
    assert parse_config(serialize_config(cfg)) == cfg
