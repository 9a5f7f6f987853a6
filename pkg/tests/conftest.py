import numpy as np
import pytest

from exsteer import Grid, GridFunction, Monotubular, PairFunction, TwoStream


def sine_series(grid, rng, n_modes=6):
    """Random smooth function vanishing at both ends."""
    k = np.arange(1, n_modes + 1)
    coef = rng.normal(size=n_modes) / k
    return coef @ np.sin(np.pi * np.outer(k, grid.nodes))


def random_field(grid, rng, pair=False):
    if pair:
        return PairFunction(grid, np.stack([sine_series(grid, rng), sine_series(grid, rng)]))
    return GridFunction(grid, sine_series(grid, rng))


def bump(grid, center=0.5, width=0.8, amplitude=1.0):
    z = (grid.nodes - center) / (0.5 * width)
    vals = np.where(np.abs(z) < 1, amplitude * np.cos(0.5 * np.pi * np.clip(z, -1, 1)) ** 2, 0.0)
    return GridFunction(grid, vals)


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


@pytest.fixture
def grid():
    return Grid(256)


@pytest.fixture
def mono():
    return Monotubular(1.0, 1.0, T=1.0, eps=0.1)


@pytest.fixture
def sym():
    return TwoStream(0.5, 0.5, 1.0, 1.0, T=1.0, eps=0.1)


ACCEPTANCE_LINES = []


def record_criterion(label, passed, detail):
    line = f"criterion {label:<10} {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
