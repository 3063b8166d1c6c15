import numpy as np
import pytest

from dispersolab import (
    EvolutionProblem, RealField, builtin_nonlinearity, builtin_symbol, make_grid,
)
from dispersolab.presets import SMOOTH_PRESET, sample_initial


def make_problem(symbol="whitham", nonlinearity="power", N=256, P=1, u0=None,
                 s_index=2.0, symbol_params=None, nl_params=None):
    grid = make_grid(N, P)
    sym = builtin_symbol(symbol, **(symbol_params or {}))
    if nl_params is None:
        nl_params = {"p": 2} if nonlinearity == "power" else {}
    nl = builtin_nonlinearity(nonlinearity, **nl_params)
    if u0 is None:
        u0 = sample_initial(SMOOTH_PRESET, grid)
    elif callable(u0):
        u0 = u0(grid.x)
    return EvolutionProblem(grid, sym, nl, RealField(grid, u0), s_index)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# {{{ acceptance report lines

_ACCEPTANCE_LINES = []


@pytest.fixture
def report_line():
    """Record (and print) the one-line PASS/FAIL verdict of an acceptance criterion."""
    def record(number, passed, text):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:2d}: {text}"
        _ACCEPTANCE_LINES.append((number, line))
        print(line)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(line)

# }}}
