"""Grid, transforms, multipliers and the linear group."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dispersolab import (
    RealField, SpectralField, apply_multiplier, builtin_symbol, forward_transform,
    inverse_transform, make_grid, semigroup,
)
from dispersolab.grid import derivative, evaluate_symbol, group_phase, hermitian_defect
from dispersolab.spaces import sobolev_norm


def test_grid_n8():
    g = make_grid(8, 1)
    assert g.dx_over_pi == Fraction(1, 4)
    assert g.dx == pytest.approx(np.pi / 4, abs=0)
    assert sorted(g.k.tolist()) == list(range(-4, 4))
    assert g.x[-1] == pytest.approx(2 * np.pi - np.pi / 4)


def test_grid_n256():
    g = make_grid(256, 1)
    assert g.dx == 2 * np.pi / 256
    assert g.length == pytest.approx(2 * np.pi)


@pytest.mark.parametrize("N,P", [(7, 1), (6, 1), (0, 1), (16, 0)])
def test_grid_rejects(N, P):
    with pytest.raises(ValueError):
        make_grid(N, P)


def test_wavenumbers_scale_with_period():
    g = make_grid(16, 3)
    assert np.allclose(g.wavenumbers, g.k / 3)
    assert g.length == pytest.approx(6 * np.pi)


def test_forward_constant():
    g = make_grid(32)
    U = forward_transform(RealField(g, np.ones(32)))
    expect = np.zeros(32)
    expect[0] = 1
    assert np.allclose(U.coeffs, expect, atol=1e-15)


def test_forward_cosine():
    g = make_grid(32)
    U = forward_transform(RealField(g, np.cos(g.x))).coeffs
    assert U[1] == pytest.approx(0.5)
    assert U[-1] == pytest.approx(0.5)
    rest = np.delete(U, [1, 31])
    assert np.max(np.abs(rest)) < 1e-15


def test_inverse_constant_and_sine():
    g = make_grid(32)
    c = np.zeros(32, complex)
    c[0] = 2
    assert np.allclose(inverse_transform(SpectralField(g, c)).samples, 2.0)
    c = np.zeros(32, complex)
    c[1], c[-1] = -0.5j, 0.5j
    assert np.allclose(inverse_transform(SpectralField(g, c)).samples, np.sin(g.x), atol=1e-15)


def test_inverse_rejects_non_hermitian():
    g = make_grid(32)
    c = np.zeros(32, complex)
    c[3] = 1.0
    assert hermitian_defect(c) > 0.1
    with pytest.raises(ValueError):
        inverse_transform(SpectralField(g, c))


def test_forward_rejects_nan():
    g = make_grid(16)
    u = np.zeros(16)
    u[3] = np.nan
    with pytest.raises(FloatingPointError):
        forward_transform(RealField(g, u))


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([8, 16, 64, 256]), st.integers(1, 3), st.integers(0, 2 ** 32 - 1))
def test_round_trip(N, P, seed):
    g = make_grid(N, P)
    u = np.random.default_rng(seed).standard_normal(N)
    back = inverse_transform(forward_transform(RealField(g, u))).samples
    assert np.max(np.abs(back - u)) < 1e-12


def test_identity_multiplier():
    g = make_grid(64)
    U = forward_transform(RealField(g, np.exp(np.sin(g.x))))
    assert np.array_equal(apply_multiplier(U, lambda xi: np.ones_like(xi)).coeffs, U.coeffs)


def test_multiplier_derivative():
    g = make_grid(64)
    U = forward_transform(RealField(g, np.sin(g.x)))
    du = inverse_transform(apply_multiplier(U, lambda xi: 1j * xi)).samples
    assert np.max(np.abs(du - np.cos(g.x))) < 1e-13


def test_multiplier_whitham_on_cosine():
    g = make_grid(64)
    m = builtin_symbol("whitham")
    U = forward_transform(RealField(g, np.cos(g.x)))
    out = inverse_transform(apply_multiplier(U, m)).samples
    # scalar oracle: sqrt(tanh(1)/1)
    assert np.max(np.abs(out - np.sqrt(np.tanh(1.0)) * np.cos(g.x))) < 1e-14
    assert m(1.0) == pytest.approx(0.8726936208978296, rel=1e-15)


def test_spectral_derivative_orders():
    g = make_grid(64, 2)
    u = RealField(g, np.sin(3 * g.x / 2))
    for order, expect in [(1, 1.5 * np.cos(1.5 * g.x)), (2, -2.25 * np.sin(1.5 * g.x)),
                          (3, -3.375 * np.cos(1.5 * g.x))]:
        assert np.max(np.abs(derivative(u, order).samples - expect)) < 1e-11


def test_semigroup_identity_at_zero():
    g = make_grid(64)
    U = forward_transform(RealField(g, np.exp(np.cos(g.x))))
    for name in ("whitham", "kdv", "bo"):
        assert np.allclose(semigroup(U, builtin_symbol(name), 0.0).coeffs, U.coeffs, atol=0)


@pytest.mark.parametrize("c,t", [(1.0, 0.3), (2.5, 1.7), (-0.7, 4.0)])
def test_semigroup_constant_symbol_translates(c, t):
    g = make_grid(64)
    U = forward_transform(RealField(g, np.sin(g.x)))
    out = inverse_transform(semigroup(U, builtin_symbol("constant", c=c), t)).samples
    # u_t + c u_x = 0 transports to the right
    assert np.max(np.abs(out - np.sin(g.x - c * t))) < 1e-13


def test_semigroup_group_law():
    g = make_grid(128)
    m = builtin_symbol("whitham")
    U = forward_transform(RealField(g, np.exp(np.sin(g.x))))
    a = semigroup(semigroup(U, m, 0.4), m, 0.9).coeffs
    b = semigroup(U, m, 1.3).coeffs
    assert np.max(np.abs(a - b)) < 1e-14
    back = semigroup(semigroup(U, m, 2.0), m, -2.0).coeffs
    assert np.max(np.abs(back - U.coeffs)) < 1e-14


def test_semigroup_kills_nothing_and_stays_real():
    g = make_grid(64)
    rng = np.random.default_rng(3)
    U = forward_transform(RealField(g, rng.standard_normal(64)))
    out = semigroup(U, builtin_symbol("kdv"), 0.37)
    assert out.hermitian_defect() < 1e-14
    assert np.allclose(np.abs(group_phase(evaluate_symbol(builtin_symbol("kdv"), g), g, 0.37)), 1, atol=1e-15, rtol=0)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(["identity", "whitham", "kdv", "bo", "fractional"]),
       st.floats(-20, 20), st.floats(0, 4), st.integers(0, 10 ** 6))
def test_semigroup_unitary_property(name, t, s, seed):
    g = make_grid(128)
    u = RealField(g, np.random.default_rng(seed).standard_normal(128))
    v = inverse_transform(semigroup(forward_transform(u), builtin_symbol(name), t))
    a, b = sobolev_norm(v, s), sobolev_norm(u, s)
    assert abs(a - b) / b < 1e-12


def test_semigroup_rejects_complex_symbol():
    g = make_grid(16)
    U = forward_transform(RealField(g, np.cos(g.x)))
    with pytest.raises(ValueError):
        semigroup(U, lambda xi: 1j * xi, 1.0)
    with pytest.raises(ValueError):
        semigroup(U, lambda xi: xi, 1.0)  # odd


def test_realfield_immutable_and_arith():
    g = make_grid(8)
    u = RealField(g, np.arange(8.0))
    with pytest.raises(ValueError):
        u.samples[0] = 1.0
    assert np.array_equal((2 * u - u).samples, u.samples)
    with pytest.raises(ValueError):
        RealField(g, np.zeros(9))
