"""Time integrators, dealiasing and the evolution driver."""

import math

import numpy as np
import pytest

from dispersolab import (
    RealField, SolverConfig, SpectralField, dealias, evolve, forward_transform,
    inverse_transform, make_grid, semigroup, step_ifrk4, step_rk4,
)
from dispersolab.presets import BREAKING_PRESET, sample_initial
from dispersolab.timestepping import DIAGNOSTIC_COLUMNS, regularity_loss_order

from conftest import make_problem


# {{{ rk4

def test_rk4_frozen_flow():
    g = make_grid(16)
    u = RealField(g, np.sin(g.x))
    out = step_rk4(u, 0.0, 0.1, lambda t, y: 0.0 * y)
    assert np.array_equal(out.samples, u.samples)


def test_rk4_scalar_decay():
    u1 = step_rk4(1.0, 0.0, 0.1, lambda t, y: -y)
    # RK4 reproduces the degree-4 Taylor polynomial of exp(-0.1)
    assert u1 == pytest.approx(1 - 0.1 + 0.01 / 2 - 0.001 / 6 + 0.0001 / 24, rel=1e-15)
    assert round(u1, 7) == 0.9048375
    assert abs(u1 - math.exp(-0.1)) < 1e-7


def test_rk4_error_drops_sixteenfold():
    def solve(dt):
        y, t = 1.0, 0.0
        for _ in range(round(1.0 / dt)):
            y = step_rk4(y, t, dt, lambda t, y: -y * math.cos(t))
            t += dt
        return abs(y - math.exp(-math.sin(1.0)))
    ratio = solve(0.02) / solve(0.01)
    assert 15 < ratio < 17


def test_rk4_time_dependent_rhs():
    # du/dt = t^3 is integrated exactly by a fourth order method
    y = step_rk4(0.0, 1.0, 0.5, lambda t, y: t ** 3)
    assert y == pytest.approx((1.5 ** 4 - 1) / 4, rel=1e-15)


def test_ifrk4_linear_is_frozen():
    prob = make_problem("kdv", "zero", N=64)
    v = prob.u0
    for t in (0.0, 0.3, 7.0):
        # only the FFT round trip touches v
        assert np.max(np.abs(step_ifrk4(v, t, 0.1, prob).samples - v.samples)) < 1e-16

# }}}


# {{{ dealiasing

def test_dealias_keeps_band():
    g = make_grid(96)
    x = g.x
    u = RealField(g, np.cos(32 * x) + np.sin(5 * x))
    U = forward_transform(u)
    assert np.max(np.abs(dealias(U).coeffs - U.coeffs)) < 1e-14


def test_dealias_removes_high_mode():
    g = make_grid(96)
    U = forward_transform(RealField(g, np.cos(47 * g.x)))
    assert abs(U.coeffs[47]) == pytest.approx(0.5)
    out = dealias(U).coeffs
    assert out[47] == 0 and out[-47] == 0
    assert np.max(np.abs(out)) < 1e-14


@pytest.mark.parametrize("N", [128, 256])
def test_dealias_product_matches_fine_grid_oracle(rng, N):
    # N not divisible by 3: with N = 3K the mode 2K aliases onto -K, which
    # the inclusive mask keeps
    g = make_grid(N)
    kmax = N // 3

    def field():
        c = np.zeros(N, complex)
        k = np.arange(1, kmax + 1)
        c[k] = rng.standard_normal(kmax) + 1j * rng.standard_normal(kmax)
        c[-k] = np.conj(c[k])
        return c

    a, b = field(), field()
    # product on a grid of 2N points: exact for |k| <= N/3 inputs, then truncate
    pad = lambda c: np.concatenate([c[:N // 2], np.zeros(N, complex), c[N // 2:]])
    fine = np.fft.fft(np.fft.ifft(pad(a)) * np.fft.ifft(pad(b)) * (2 * N) ** 2) / (2 * N)
    oracle = np.concatenate([fine[:N // 2], fine[-N // 2:]])
    oracle[3 * np.abs(g.k) > N] = 0
    coarse = np.fft.fft(np.fft.ifft(a) * np.fft.ifft(b) * N * N) / N
    got = dealias(SpectralField(g, coarse)).coeffs
    assert np.max(np.abs(got - oracle)) < 1e-12 * np.max(np.abs(oracle))

# }}}


# {{{ evolve

@pytest.mark.parametrize("method", ["rk4_direct", "ifrk4_transformed"])
@pytest.mark.parametrize("name", ["whitham", "kdv", "bo"])
def test_linear_flow_exact(method, name):
    prob = make_problem(name, "zero", N=128)
    if name == "kdv" and method == "rk4_direct":
        dt, t_end = 1e-5, 0.02  # explicit stability needs dt < 2.8 / (N/2)^3
    elif name == "bo" and method == "rk4_direct":
        dt, t_end = 2e-4, 0.1  # and dt < 2.8 / (N/2)^2
    else:
        dt, t_end = 1e-3, 0.5
    tr = evolve(prob, SolverConfig(method=method, dt=dt, t_end=t_end))
    exact = inverse_transform(semigroup(forward_transform(prob.u0), prob.symbol, t_end))
    tol = 1e-10 if method == "ifrk4_transformed" else 1e-8
    assert tr.completed
    assert np.max(np.abs(tr.final.samples - exact.samples)) < tol


def test_whitham_small_data_long_run():
    prob = make_problem("whitham", u0=lambda x: 0.1 * np.exp(-4 * (x - np.pi) ** 2))
    tr = evolve(prob, SolverConfig(t_end=5.0))
    assert tr.termination == "completed"
    hs = tr.diagnostics.column("Hs_norm")
    assert hs.max() < 1.2 * hs[0]


def test_whitham_breaking_detected():
    g = make_grid(1024)
    prob = make_problem("whitham", N=1024, u0=sample_initial(BREAKING_PRESET, g))
    tr = evolve(prob, SolverConfig(dt=5e-4, t_end=2.0, blowup_gradient_factor=50))
    assert tr.termination == "blowup_detected"
    d = tr.diagnostics
    assert d.column("sup_ux")[-1] > 50 * d.column("sup_ux")[0]
    assert tr.snapshots[-1].max_abs() < 2 * prob.u0.max_abs()


def test_resolution_loss_reported():
    # inviscid Burgers on a coarse grid: the shock outruns the resolution
    prob = make_problem("constant", N=64, symbol_params={"c": 0.0}, u0=np.sin)
    tr = evolve(prob, SolverConfig(dt=1e-3, t_end=2.0))
    assert tr.termination == "resolution_lost"
    assert tr.final_time < 1.0
    assert not tr.completed


def test_trajectory_bookkeeping():
    prob = make_problem("whitham", N=64)
    tr = evolve(prob, SolverConfig(dt=0.01, t_end=0.25, snapshot_stride=10))
    assert tr.times == pytest.approx([0.0, 0.1, 0.2, 0.25])
    assert tr.steps == 25
    assert tr.final_time == 0.25
    assert np.array_equal(tr.final.samples, tr.snapshots[-1].samples)
    assert tr.diagnostics.as_array().shape == (4, len(DIAGNOSTIC_COLUMNS))


def test_evolve_is_deterministic():
    prob = make_problem("bo", N=128)
    cfg = SolverConfig(dt=1e-3, t_end=0.1)
    a, b = evolve(prob, cfg), evolve(prob, cfg)
    assert np.array_equal(a.final.samples, b.final.samples)
    assert a.diagnostics.rows == b.diagnostics.rows


def test_regularity_loss_order():
    assert regularity_loss_order(make_problem("whitham").symbol) == 1
    assert regularity_loss_order(make_problem("kdv").symbol) == 3
    assert regularity_loss_order(make_problem("bo").symbol) == 2


def test_solver_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(method="euler")
    with pytest.raises(ValueError):
        SolverConfig(dt=0)
    with pytest.raises(ValueError):
        SolverConfig(snapshot_stride=0)
    assert SolverConfig().replace(dt=0.5).dt == 0.5

# }}}
