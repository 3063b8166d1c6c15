"""Property-lab experiments: ratio checks and solver experiments."""

import math

import numpy as np
import pytest

from dispersolab import BesovIndex, CutoffFunction, RealField, SolverConfig, make_grid
from dispersolab.lab import (
    ExperimentReport, RatioReport, check_composition_bound, check_localizing,
    check_norm_equivalence, composition_derivative_field, convergence_study,
    periodic_extension, run_continuous_dependence, run_wave_breaking,
)
from dispersolab.presets import Family, band_limited_family, sine_family
from dispersolab.spaces import sobolev_norm

from conftest import make_problem

SQUARE = (lambda x: x ** 2, lambda x: 2 * x)
ABSX = (lambda x: np.abs(x) * x, lambda x: 2 * np.abs(x))


def _family(n=6, seed=1):
    return band_limited_family(n, 8, seed)


# {{{ reports

def test_ratio_report_flags():
    rep = RatioReport("f", [1.0, 2.0], 2.0, "stable")
    assert rep.bounded and rep.passed
    assert not RatioReport("f", [1.0, math.inf], math.inf, "growing").bounded
    assert not RatioReport("f", [1.0], 1.0, "growing").passed


def test_experiment_report_outcomes():
    with pytest.raises(ValueError):
        ExperimentReport("x", {}, "maybe", {})
    a = ExperimentReport("x", {"k": 1}, "pass", {})
    b = ExperimentReport("x", {"k": 1}, "fail", {})
    assert a.provenance == b.provenance and len(a.provenance) == 64

# }}}


# {{{ composition

def test_composition_identity_bounded():
    rep = check_composition_bound(lambda x: x, lambda x: np.ones_like(x), _family(),
                                  BesovIndex(2, 2, 2), N=128)
    assert rep.passed


def test_composition_square():
    rep = check_composition_bound(*SQUARE, _family(), BesovIndex(2, 2, 2), N=128)
    assert rep.passed
    assert rep.details["a"] == pytest.approx(
        [RealField(make_grid(128), m(make_grid(128).x)).max_abs() for m in _family().members])


def test_composition_nonsmooth():
    rep = check_composition_bound(*ABSX, _family(), BesovIndex(1.75, 2, 2), N=128)
    assert rep.passed


def test_composition_finite_difference_path_agrees():
    a = 1.3
    errs = []
    for dx in (2 * np.pi / 256, np.pi / 256):
        exact = composition_derivative_field(*SQUARE, a, dx)
        approx = composition_derivative_field(SQUARE[0], None, a, dx)
        errs.append(np.max(np.abs(exact.samples - approx.samples)) / np.max(np.abs(exact.samples)))
    assert errs[0] < 1e-4
    # centered differences: second order in the step
    assert 3.5 < errs[0] / errs[1] < 4.5


def test_composition_scaled_member_records_amplitude():
    fam = _family(1)
    g = fam.members[0]
    scaled = Family("scaled", (g, g.scaled(0.5)))
    rep = check_composition_bound(*SQUARE, scaled, BesovIndex(2, 2, 2), N=128)
    assert rep.details["a"][1] == pytest.approx(0.5 * rep.details["a"][0])


def test_composition_requires_hypothesis():
    with pytest.raises(ValueError, match="1 \\+ 1/p"):
        check_composition_bound(*SQUARE, _family(), BesovIndex(1.5, 2, 2))

# }}}


# {{{ localizing

def test_periodic_extension_matches_function():
    g = make_grid(64)
    u = RealField(g, np.sin(g.x) + np.cos(3 * g.x))
    x, f, A, M = periodic_extension(u, 3)
    assert M == 192 and A == pytest.approx(3 * np.pi)
    assert np.max(np.abs(f - (np.sin(x) + np.cos(3 * x)))) < 1e-12


def test_localizing_constant():
    fam = Family("one", (lambda x: np.ones_like(x),))
    rep = check_localizing(CutoffFunction(np.pi), fam, BesovIndex(2, 2, 2), N=128)
    assert rep.bounded and rep.passed


@pytest.mark.parametrize("idx", [(2, 2, 2), (1.5, 2, 2)])
def test_localizing_sines(idx):
    rep = check_localizing(CutoffFunction(np.pi), sine_family(8), BesovIndex(*idx), N=128)
    assert rep.passed
    # ratios vary smoothly: no outlier beyond a small factor
    assert rep.max_ratio / rep.min_ratio < 3

# }}}


# {{{ norm equivalence

def test_norm_equivalence_single_modes():
    fam = Family("cos", tuple((lambda k: (lambda x: np.cos(k * x)))(k) for k in range(1, 17)))
    rep = check_norm_equivalence(fam, [2.0], N=256)[2.0]
    r = np.array(rep.ratios)
    assert rep.passed
    # no outliers: one global interval, and past the lowest mode the ratio
    # drifts by under 2% per step in k
    assert r.max() / r.min() < 1.25
    assert np.max(np.abs(np.diff(r[1:]) / r[1:-1])) < 0.02


def test_norm_equivalence_scaling_invariance():
    fam = band_limited_family(3, 32, 5)
    scaled = Family("scaled", tuple(m.scaled(7.5) for m in fam.members))
    a = check_norm_equivalence(fam, [1.75], N=256)[1.75].ratios
    b = check_norm_equivalence(scaled, [1.75], N=256)[1.75].ratios
    assert np.allclose(a, b, rtol=1e-12, atol=0)


def test_norm_equivalence_white_noise_inside_interval():
    fam = band_limited_family(8, 32, 11)
    rep = check_norm_equivalence(fam, [2.0], N=256)[2.0]
    noise = band_limited_family(1, 32, 12, decay=0.0)
    r = check_norm_equivalence(noise, [2.0], N=256)[2.0].ratios[0]
    assert rep.passed
    assert 0.8 * rep.min_ratio <= r <= 1.25 * rep.max_ratio

# }}}


# {{{ evolution experiments

def test_continuous_dependence_zero_eps():
    prob = make_problem("whitham", N=128)
    w = RealField(prob.grid, np.cos(prob.grid.x))
    rep = run_continuous_dependence(prob, [0.0], w, 0.1, SolverConfig(dt=1e-2))
    assert rep.metrics["d_0"] == 0.0


def test_continuous_dependence_linear_exact():
    prob = make_problem("whitham", "zero", N=128)
    w = RealField(prob.grid, np.cos(prob.grid.x) + 0.2 * np.sin(4 * prob.grid.x))
    eps = [1e-2, 1e-3, 1e-4]
    rep = run_continuous_dependence(prob, eps, w, 0.5, SolverConfig(dt=1e-2, snapshot_stride=10))
    wn = sobolev_norm(w, prob.s_index)
    for i, e in enumerate(eps):
        assert abs(rep.metrics[f"d_{i}"] - e * wn) <= 1e-10 * e * wn
    assert rep.outcome == "pass"


def test_continuous_dependence_whitham():
    prob = make_problem("whitham", N=128)
    w = RealField(prob.grid, np.cos(prob.grid.x))
    rep = run_continuous_dependence(prob, [1e-2, 1e-3, 1e-4], w, 0.5,
                                    SolverConfig(dt=5e-3, snapshot_stride=10))
    assert rep.outcome == "pass"
    assert rep.metrics["spread"] < 1.5


def test_wave_breaking_linear_never_breaks():
    g = make_grid(256)
    prob = make_problem("whitham", "zero", N=256, u0=lambda x: np.exp(-4 * (x - np.pi) ** 2))
    rep = run_wave_breaking(prob, SolverConfig(dt=1e-2, t_end=2.0))
    assert rep.outcome == "fail"
    assert math.isnan(rep.metrics["breaking_time"])
    assert rep.metrics["max_gradient_ratio"] < 2


def test_wave_breaking_inconclusive_on_coarse_grid():
    prob = make_problem("whitham", N=32, u0=lambda x: np.exp(-4 * (x - np.pi) ** 2))
    rep = run_wave_breaking(prob, SolverConfig(dt=1e-3, t_end=2.0))
    assert rep.outcome == "inconclusive"


@pytest.mark.parametrize("method", ["rk4_direct", "ifrk4_transformed"])
def test_convergence_order_four(method):
    prob = make_problem("whitham", N=128)
    rep = convergence_study(prob, method, [0.02, 0.01, 0.005, 0.0025], t_end=0.5)
    assert rep.outcome == "pass"
    assert abs(rep.metrics["order"] - 4) < 0.3


def test_convergence_linear_exact():
    prob = make_problem("kdv", "zero", N=128)
    rep = convergence_study(prob, "ifrk4_transformed", [0.1, 0.05, 0.025, 0.0125], t_end=1.0)
    assert rep.outcome == "pass"
    assert rep.metrics["exact"] == 1.0
    assert max(rep.metrics[f"error_{i}"] for i in range(4)) < 1e-13


def test_convergence_study_validates_steps():
    prob = make_problem("whitham", N=64)
    with pytest.raises(ValueError):
        convergence_study(prob, "rk4_direct", [0.1, 0.05, 0.02, 0.01])
    with pytest.raises(ValueError):
        convergence_study(prob, "rk4_direct", [0.1, 0.05])

# }}}
