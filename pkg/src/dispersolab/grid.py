"""Periodic grid, discrete Fourier representation and Fourier multipliers.

Conventions
-----------
The domain is ``[0, 2*pi*P)`` sampled at ``x_j = j*dx``, ``dx = 2*pi*P/N``.
Coefficients are stored in FFT order (``k = 0, 1, ..., N/2-1, -N/2, ..., -1``)
with the physical frequency ``xi_k = k/P`` and

.. math:: \\hat u_k = \\frac{1}{N} \\sum_j u(x_j) e^{-i k x_j / P},

so that ``\\hat u_0`` is the mean and Parseval reads
``sum |\\hat u_k|^2 = mean(|u|^2)``.

The Nyquist mode ``k = -N/2`` has no partner.  Multipliers that are not
real there (``i*xi`` and friends) zero it so that real fields stay real, and
the linear group leaves it untouched.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Callable

import numpy as np

HERMITIAN_RTOL = 1e-10


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class PeriodicGrid:
    N: int
    P: int = 1

    def __post_init__(self):
        if int(self.N) != self.N or int(self.P) != self.P:
            raise ValueError("N and P must be integers")
        if self.N < 8 or self.N % 2:
            raise ValueError(f"N must be an even integer >= 8, got {self.N}")
        if self.P < 1:
            raise ValueError(f"P must be >= 1, got {self.P}")

    @property
    def length(self) -> float:
        return 2.0 * np.pi * self.P

    @property
    def dx_over_pi(self) -> Fraction:
        """``dx/pi`` as an exact rational, ``2P/N``."""
        return Fraction(2 * self.P, self.N)

    @property
    def dx(self) -> float:
        return 2.0 * np.pi * self.P / self.N

    @cached_property
    def x(self) -> np.ndarray:
        return _frozen(np.arange(self.N) * self.dx)

    @cached_property
    def k(self) -> np.ndarray:
        """Integer mode numbers in FFT order."""
        return _frozen(np.fft.fftfreq(self.N, 1.0 / self.N).astype(np.int64))

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """Physical frequencies ``k/P`` in FFT order."""
        return _frozen(self.k / self.P)

    @property
    def nyquist_index(self) -> int:
        return self.N // 2

    def refine(self, factor: int = 2) -> "PeriodicGrid":
        return PeriodicGrid(self.N * factor, self.P)


def make_grid(N: int, P: int = 1) -> PeriodicGrid:
    return PeriodicGrid(N, P)


@dataclass(frozen=True, eq=False)
class RealField:
    """Real samples ``u(x_j)`` on a :class:`PeriodicGrid`."""

    grid: PeriodicGrid
    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.float64)
        if s.shape != (self.grid.N,):
            raise ValueError(
                f"expected {self.grid.N} samples, got shape {s.shape}")
        object.__setattr__(self, "samples", _frozen(s))

    @classmethod
    def from_function(cls, grid: PeriodicGrid,
                      func: Callable[[np.ndarray], np.ndarray]) -> "RealField":
        return cls(grid, func(grid.x))

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.samples)))

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.samples)))

    def _coerce(self, other):
        if isinstance(other, RealField):
            if other.grid != self.grid:
                raise ValueError("fields live on different grids")
            return other.samples
        return other

    def __add__(self, other):
        return RealField(self.grid, self.samples + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return RealField(self.grid, self.samples - self._coerce(other))

    def __rsub__(self, other):
        return RealField(self.grid, self._coerce(other) - self.samples)

    def __mul__(self, other):
        return RealField(self.grid, self.samples * self._coerce(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return RealField(self.grid, self.samples / self._coerce(other))

    def __neg__(self):
        return RealField(self.grid, -self.samples)


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Fourier coefficients (FFT order) of a periodic function."""

    grid: PeriodicGrid
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.complex128)
        if c.shape != (self.grid.N,):
            raise ValueError(
                f"expected {self.grid.N} coefficients, got shape {c.shape}")
        object.__setattr__(self, "coeffs", _frozen(c))

    def hermitian_defect(self) -> float:
        """Relative size of ``c_{-k} - conj(c_k)``, 0 for a real function."""
        return hermitian_defect(self.coeffs)


def hermitian_defect(c: np.ndarray) -> float:
    scale = np.max(np.abs(c))
    if scale == 0.0:
        return 0.0
    mirrored = np.conj(np.roll(c[::-1], 1))
    return float(np.max(np.abs(c - mirrored)) / scale)


def forward_transform(u: RealField) -> SpectralField:
    if not u.is_finite():
        raise FloatingPointError("cannot transform a field with NaN/Inf samples")
    return SpectralField(u.grid, np.fft.fft(u.samples) / u.grid.N)


def inverse_transform(U: SpectralField) -> RealField:
    defect = U.hermitian_defect()
    if defect > HERMITIAN_RTOL:
        raise ValueError(
            f"coefficients are not Hermitian-symmetric (defect {defect:.3e}); "
            "they do not represent a real field")
    return RealField(U.grid, np.fft.ifft(U.coeffs).real * U.grid.N)


def evaluate_symbol(sigma, grid: PeriodicGrid) -> np.ndarray:
    values = np.asarray(sigma(grid.wavenumbers))
    if values.shape == ():
        values = np.full(grid.N, values[()])
    if not np.all(np.isfinite(values)):
        bad = grid.wavenumbers[~np.isfinite(values)]
        raise ValueError(f"multiplier is not finite at frequencies {bad[:5]}")
    return values


def apply_multiplier(U: SpectralField, sigma) -> SpectralField:
    """Multiply ``U`` by ``sigma(xi_k)``.

    ``sigma`` is any callable mapping an array of frequencies to an array of
    (real or complex) values.  The Nyquist coefficient is zeroed when
    ``sigma`` is not real there.
    """
    values = evaluate_symbol(sigma, U.grid)
    out = values * U.coeffs
    if np.iscomplexobj(values) and values[U.grid.nyquist_index].imag != 0.0:
        out[U.grid.nyquist_index] = 0.0
    return SpectralField(U.grid, out)


def group_phase(m_values: np.ndarray, grid: PeriodicGrid, t: float) -> np.ndarray:
    """Multiplier ``exp(-i t xi m(xi))`` of ``e^{-tL d/dx}``, 1 at Nyquist."""
    phase = np.exp(-1j * t * grid.wavenumbers * m_values)
    phase[grid.nyquist_index] = 1.0
    return phase


def check_even_real(m, grid: PeriodicGrid) -> np.ndarray:
    """Evaluate ``m`` on the grid and verify it is real and even."""
    xi = grid.wavenumbers
    values = np.asarray(m(xi))
    if values.shape == ():
        values = np.full(grid.N, values[()])
    if np.iscomplexobj(values):
        if np.any(values.imag != 0.0):
            raise ValueError("dispersion symbol must be real")
        values = values.real
    if not np.all(np.isfinite(values)):
        raise ValueError("dispersion symbol is not finite on the grid")
    mirrored = np.asarray(m(-xi))
    if mirrored.shape == ():
        mirrored = np.full(grid.N, mirrored[()])
    if np.any(mirrored != values):
        raise ValueError("dispersion symbol must be even: m(xi) != m(-xi)")
    return values.astype(np.float64)


def semigroup(U: SpectralField, m, t: float) -> SpectralField:
    """Apply the linear group ``e^{-tL d/dx}``, i.e. solve ``u_t + L u_x = 0``
    for time ``t`` starting from ``U``.
    """
    values = check_even_real(m, U.grid)
    return SpectralField(U.grid, group_phase(values, U.grid, t) * U.coeffs)


def derivative_symbol(order: int):
    """Symbol ``(i xi)^order`` with the power of ``i`` taken exactly."""
    unit = 1j ** (order % 4)
    return lambda xi: unit * np.asarray(xi, dtype=np.float64) ** order


def derivative(u: RealField, order: int = 1) -> RealField:
    """Spectral derivative of a real field."""
    return inverse_transform(
        apply_multiplier(forward_transform(u), derivative_symbol(order)))
