"""Dispersion symbols, nonlinearities and the two right-hand sides of

.. math:: u_t + (n(u))_x + L u_x = 0,\\qquad \\widehat{Lf}(\\xi) = m(\\xi)\\hat f(\\xi).

``rhs_direct`` discretizes the equation as written.  ``rhs_transformed``
works on ``v = e^{tL d/dx} u``, for which the linear part drops out and

.. math:: v_t = -e^{tL\\partial_x}\\big[n'(w)\\, w_x\\big],\\qquad w = e^{-tL\\partial_x} v.

Symbol conventions for the named equations (the KdV and Benjamin-Ono
symbols are conventions of this package):

==============  ======================  =============  =======
name            m(xi)                   m(0)           growth
==============  ======================  =============  =======
identity        1                       1              0
constant(c)     c                       c              0
whitham         sqrt(tanh(xi)/xi)       1              -1/2
kdv             -xi**2                  0              2
bo              abs(xi)                 0              1
fractional(a)   abs(xi)**a              0              a
==============  ======================  =============  =======

With ``m = -xi**2`` the operator ``L d/dx`` is ``d^3/dx^3``, so ``kdv`` with
``n(u) = u**2`` is ``u_t + 2 u u_x + u_xxx = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from dispersolab.grid import (
    PeriodicGrid, RealField, SpectralField, check_even_real, group_phase,
)

ScalarMap = Callable[[np.ndarray], np.ndarray]


class BlowUp(FloatingPointError):
    """Raised when a right-hand side produces non-finite values."""


# {{{ dispersion symbols

@dataclass(frozen=True)
class DispersionSymbol:
    """Real even symbol ``m`` with declared growth order ``l``.

    ``func`` is never evaluated at ``xi = 0``; ``limit_at_zero`` is used
    there instead.
    """

    name: str
    func: ScalarMap
    growth_order: float
    limit_at_zero: float
    params: dict = field(default_factory=dict, compare=False)

    def __call__(self, xi):
        xi = np.asarray(xi, dtype=np.float64)
        out = np.full(xi.shape, float(self.limit_at_zero))
        nz = xi != 0.0
        if np.any(nz):
            out[nz] = self.func(xi[nz])
        return out if out.shape else float(out)

    def on_grid(self, grid: PeriodicGrid) -> np.ndarray:
        return check_even_real(self, grid)

    def growth_constant(self, grid: PeriodicGrid) -> float:
        """``max |m(xi)| / (1+|xi|)^l`` over the grid frequencies."""
        xi = grid.wavenumbers
        return float(np.max(np.abs(self(xi)) / (1.0 + np.abs(xi))
                            ** self.growth_order))

    def evenness_defect(self, grid: PeriodicGrid) -> float:
        xi = grid.wavenumbers
        return float(np.max(np.abs(self(xi) - self(-xi))))


def _whitham(xi):
    a = np.abs(xi)
    return np.sqrt(np.tanh(a) / a)


SYMBOL_NAMES = ("identity", "whitham", "kdv", "bo", "fractional", "constant")


def builtin_symbol(name: str, **params) -> DispersionSymbol:
    if name == "identity":
        return DispersionSymbol(name, lambda xi: np.ones_like(xi), 0.0, 1.0)
    if name == "constant":
        c = float(params.get("c", 1.0))
        return DispersionSymbol(name, lambda xi: np.full_like(xi, c), 0.0, c,
                                {"c": c})
    if name == "whitham":
        return DispersionSymbol(name, _whitham, -0.5, 1.0)
    if name == "kdv":
        return DispersionSymbol(name, lambda xi: -xi * xi, 2.0, 0.0)
    if name == "bo":
        return DispersionSymbol(name, np.abs, 1.0, 0.0)
    if name == "fractional":
        alpha = float(params.get("alpha", 1.0))
        if alpha <= 0:
            raise ValueError("fractional symbol needs alpha > 0")
        return DispersionSymbol(name, lambda xi: np.abs(xi) ** alpha, alpha,
                                0.0, {"alpha": alpha})
    raise ValueError(
        f"unknown symbol {name!r}; choose from {', '.join(SYMBOL_NAMES)}")

# }}}


# {{{ nonlinearities

@dataclass(frozen=True)
class Nonlinearity:
    """``n`` with derivatives ``n1 = n'``, ``n2 = n''`` and antiderivative
    ``N_anti`` (``N_anti' = n``, ``N_anti(0) = 0``).

    ``regularity`` is ``"smooth"`` or ``"H^{r}_loc"``.
    """

    name: str
    n: ScalarMap
    n1: ScalarMap
    n2: ScalarMap
    N_anti: ScalarMap
    regularity: str = "smooth"
    params: dict = field(default_factory=dict, compare=False)

    @property
    def is_zero(self) -> bool:
        return self.name == "zero"


def _zeros(u):
    return np.zeros_like(np.asarray(u, dtype=np.float64))


def power(p: int) -> Nonlinearity:
    if int(p) != p or p < 2:
        raise ValueError(f"power nonlinearity needs an integer p >= 2, got {p}")
    p = int(p)
    return Nonlinearity(
        "power",
        n=lambda u: u ** p,
        n1=lambda u: p * u ** (p - 1),
        n2=lambda u: p * (p - 1) * u ** (p - 2),
        N_anti=lambda u: u ** (p + 1) / (p + 1),
        params={"p": p})


def signed_power(p: float) -> Nonlinearity:
    if p < 2:
        raise ValueError(f"signed_power needs p >= 2, got {p}")
    p = float(p)

    def n2(u):
        a = np.abs(u)
        # p == 2 gives 2*sign(u); sign(0) = 0 matches the p > 2 limit
        return p * (p - 1) * np.sign(u) * a ** (p - 2)

    return Nonlinearity(
        "signed_power",
        n=lambda u: np.abs(u) ** (p - 1) * u,
        n1=lambda u: p * np.abs(u) ** (p - 1),
        n2=n2,
        N_anti=lambda u: np.abs(u) ** (p + 1) / (p + 1),
        regularity=f"H^{{{p + 0.5:g}}}_loc",
        params={"p": p})


def exponential() -> Nonlinearity:
    return Nonlinearity(
        "exponential",
        n=lambda u: np.expm1(u) - u,
        n1=np.expm1,
        n2=np.exp,
        N_anti=lambda u: np.expm1(u) - u - 0.5 * u * u)


def zero() -> Nonlinearity:
    return Nonlinearity("zero", _zeros, _zeros, _zeros, _zeros)


NONLINEARITY_NAMES = ("power", "signed_power", "exponential", "zero", "custom")


def builtin_nonlinearity(name: str, **params) -> Nonlinearity:
    if name == "power":
        return power(params.get("p", 2))
    if name == "signed_power":
        return signed_power(params.get("p", 2.0))
    if name == "exponential":
        return exponential()
    if name == "zero":
        return zero()
    if name == "custom":
        missing = {"n", "n1", "n2", "N_anti"} - params.keys()
        if missing:
            raise ValueError(f"custom nonlinearity is missing {sorted(missing)}")
        return Nonlinearity("custom", params["n"], params["n1"], params["n2"],
                            params["N_anti"],
                            params.get("regularity", "smooth"))
    raise ValueError(
        f"unknown nonlinearity {name!r}; choose from "
        f"{', '.join(NONLINEARITY_NAMES)}")

# }}}


# {{{ problem and right-hand sides

@dataclass(frozen=True, eq=False)
class EvolutionProblem:
    grid: PeriodicGrid
    symbol: DispersionSymbol
    nonlinearity: Nonlinearity
    u0: RealField
    s_index: float = 2.0

    def __post_init__(self):
        if not self.s_index > 1.5:
            raise ValueError(
                f"s_index must exceed 3/2 for local well-posedness, "
                f"got {self.s_index}")
        if self.u0.grid != self.grid:
            raise ValueError("u0 lives on a different grid")
        if not self.u0.is_finite():
            raise ValueError("u0 has non-finite samples")

    def with_u0(self, u0: RealField) -> "EvolutionProblem":
        return EvolutionProblem(self.grid, self.symbol, self.nonlinearity, u0,
                                self.s_index)

    def operators(self, dealias: bool = True) -> "SpectralOperators":
        return SpectralOperators(self, dealias)


class SpectralOperators:
    """Precomputed multipliers for one problem; the hot path of the solvers.

    All methods act on coefficient arrays in FFT order (1/N normalization).
    """

    def __init__(self, prob: EvolutionProblem, dealias: bool = True):
        grid = prob.grid
        self.prob = prob
        self.grid = grid
        self.N = grid.N
        self.m = prob.symbol.on_grid(grid)
        self.ik = 1j * grid.wavenumbers
        self.ik[grid.nyquist_index] = 0.0
        self.ikm = self.ik * self.m
        self.mask = dealias_mask(grid) if dealias else None
        self.nl = prob.nonlinearity
        self._phase_cache = {}

    def to_physical(self, U):
        return np.fft.ifft(U).real * self.N

    def to_spectral(self, u):
        return np.fft.fft(u) / self.N

    def phase(self, t):
        ph = self._phase_cache.get(t)
        if ph is None:
            ph = group_phase(self.m, self.grid, t)
            if len(self._phase_cache) > 64:
                self._phase_cache.clear()
            self._phase_cache[t] = ph
        return ph

    def _finite(self, a, what):
        if not np.all(np.isfinite(a)):
            raise BlowUp(f"non-finite values in {what}")
        return a

    def _truncate(self, F):
        if self.mask is not None:
            F = F * self.mask
        return F

    def direct(self, U):
        """Coefficients of ``-(n(u))_x - L u_x``."""
        if self.nl.is_zero:
            return -self.ikm * U
        u = self.to_physical(U)
        with np.errstate(over="ignore", invalid="ignore"):
            nu = self._finite(self.nl.n(u), "n(u)")
        F = self._truncate(self.to_spectral(nu))
        return -self.ik * F - self.ikm * U

    def transformed(self, t, V):
        """Coefficients of ``-A(t, v) v`` for the variable ``v``."""
        if self.nl.is_zero:
            return np.zeros_like(V)
        W = self.phase(t) * V
        w = self.to_physical(W)
        wx = self.to_physical(self.ik * W)
        with np.errstate(over="ignore", invalid="ignore"):
            z = self._finite(self.nl.n1(w) * wx, "n'(w) w_x")
        Z = self._truncate(self.to_spectral(z))
        Z[self.grid.nyquist_index] = 0.0
        return -self.phase(-t) * Z


def dealias_mask(grid: PeriodicGrid) -> np.ndarray:
    """1 for ``|k| <= N/3``, 0 above (two-thirds rule)."""
    return (3 * np.abs(grid.k) <= grid.N).astype(np.float64)


def _as_real(u: RealField, V: np.ndarray) -> RealField:
    return RealField(u.grid, np.fft.ifft(V).real * u.grid.N)


def rhs_direct(u: RealField, prob: EvolutionProblem,
               dealias: bool = True) -> RealField:
    """``-(n(u))_x - L u_x``; raises :class:`BlowUp` if ``n(u)`` overflows."""
    ops = prob.operators(dealias)
    return _as_real(u, ops.direct(ops.to_spectral(u.samples)))


def rhs_transformed(v: RealField, t: float, prob: EvolutionProblem,
                    dealias: bool = True) -> RealField:
    """``-A(t, v) v`` with ``A(t,y) = e^{tL d/dx}[n'(e^{-tL d/dx} y) d/dx] e^{-tL d/dx}``."""
    ops = prob.operators(dealias)
    return _as_real(v, ops.transformed(t, ops.to_spectral(v.samples)))


def invariants(u: RealField, prob: EvolutionProblem) -> dict:
    """Mass, L2 and Hamiltonian as grid means.

    ``hamiltonian = mean(N_anti(u) + u*Lu/2)``.
    """
    U = np.fft.fft(u.samples) / u.grid.N
    Lu = np.fft.ifft(prob.symbol.on_grid(u.grid) * U).real * u.grid.N
    with np.errstate(over="ignore", invalid="ignore"):
        ham = np.mean(prob.nonlinearity.N_anti(u.samples) + 0.5 * u.samples * Lu)
    return {
        "mass": float(np.mean(u.samples)),
        "l2": float(np.mean(u.samples ** 2)),
        "hamiltonian": float(ham),
    }

# }}}
