"""Discrete Sobolev and Besov norms, differences and cutoff functions.

Besov norms use the derivative-difference form

.. math::

    \\|f\\|_{B^s_{pq}} = \\sum_{j \\le [s]^-} \\|\\partial^j f\\|_{L_p}
      + \\Big(\\int |h|^{-\\{s\\}^+ q}\\,
        \\|\\Delta_h^2 \\partial^{[s]^-} f\\|_{L_p}^q \\frac{dh}{|h|}\\Big)^{1/q},

with ``s = [s]^- + {s}^+``, ``{s}^+`` in ``(0, 1]`` (so integer ``s`` has
``[s]^- = s - 1``) and ``sup_h |h|^{-{s}^+} ||...||_{L_p}`` for ``q = inf``.

Discretization: derivatives are spectral, ``L_p`` norms are Riemann sums
``(dx * sum |f|^p)^(1/p)`` over one period (no ``1/2pi``), and the ``h``
integral runs over exact grid shifts ``h = j*dx`` with trapezoid weights,
doubled for ``-h``.  Shifts below ``dx`` are not resolved, so the discrete
norm of a function outside ``B^s_pq`` stays finite at fixed resolution and
instead grows under refinement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from dispersolab.grid import RealField

RESTRICTED_DELTA = 0.25
SMOOTHSTEP_ORDER = 8


# {{{ indices

@dataclass(frozen=True)
class BesovIndex:
    s: float
    p: float = 2.0
    q: float = 2.0

    def __post_init__(self):
        if not self.s > 0:
            raise ValueError(f"s must be positive, got {self.s}")
        if not 1 < self.p < math.inf:
            raise ValueError(f"p must lie in (1, inf), got {self.p}")
        if not 1 < self.q <= math.inf:
            raise ValueError(f"q must lie in (1, inf], got {self.q}")

    @property
    def s_floor(self) -> int:
        """``[s]^-``: the largest integer strictly below ``s``."""
        return math.ceil(self.s) - 1

    @property
    def s_frac(self) -> float:
        """``{s}^+ = s - [s]^-``, in ``(0, 1]``."""
        return self.s - self.s_floor

    def shifted(self, ds: float) -> "BesovIndex":
        return BesovIndex(self.s + ds, self.p, self.q)

# }}}


# {{{ sobolev

def sobolev_norm_coeffs(U: np.ndarray, xi: np.ndarray, s: float) -> float:
    return float(np.sqrt(np.sum((1.0 + xi * xi) ** s * np.abs(U) ** 2)))


def sobolev_norm(u: RealField, s: float) -> float:
    """``sqrt(sum_k (1 + xi_k^2)^s |u_k|^2)`` with mean-normalized coefficients.

    Negative ``s`` is accepted (used for the regularity of ``u_t`` under
    strongly dispersive symbols).
    """
    U = np.fft.fft(u.samples) / u.grid.N
    return sobolev_norm_coeffs(U, u.grid.wavenumbers, s)

# }}}


# {{{ line fields

@dataclass(frozen=True, eq=False)
class LineField:
    """Samples of a compactly supported function on ``[-A, A)``.

    ``x_i = -A + i*dx`` with ``dx = 2A/M``; the samples vanish outside
    ``support``.
    """

    samples: np.ndarray
    A: float
    support: tuple

    def __post_init__(self):
        s = np.array(self.samples, dtype=np.float64)
        s.flags.writeable = False
        object.__setattr__(self, "samples", s)
        lo, hi = map(float, self.support)
        object.__setattr__(self, "support", (lo, hi))
        if not -self.A <= lo <= hi <= self.A:
            raise ValueError(f"support {self.support} is not inside [-A, A]")
        outside = (self.x < lo) | (self.x > hi)
        if np.any(s[outside] != 0.0):
            raise ValueError("samples do not vanish outside the declared support")

    @classmethod
    def from_function(cls, func, A: float, M: int, support) -> "LineField":
        x = -A + np.arange(M) * (2.0 * A / M)
        lo, hi = support
        inside = (x >= lo) & (x <= hi)
        samples = np.zeros(M)
        samples[inside] = func(x[inside])
        return cls(samples, A, support)

    @property
    def M(self) -> int:
        return self.samples.shape[0]

    @property
    def dx(self) -> float:
        return 2.0 * self.A / self.M

    @cached_property
    def x(self) -> np.ndarray:
        return -self.A + np.arange(self.M) * self.dx

    def with_samples(self, samples, support=None) -> "LineField":
        return LineField(samples, self.A, self.support if support is None else support)

# }}}


# {{{ differences

def _shift_zero(f: np.ndarray, j: int) -> np.ndarray:
    """``g[i] = f[i + j]`` with zeros past either end."""
    out = np.zeros_like(f)
    M = f.shape[-1]
    if j >= 0:
        out[..., :M - j] = f[..., j:]
    else:
        out[..., -j:] = f[..., :M + j]
    return out


def difference(f, j: int, order: int = 1):
    """``Delta_h^order f`` with ``h = j*dx``; ``Delta_h f(x) = f(x+h) - f(x)``.

    Periodic wraparound for :class:`RealField`; zero extension for
    :class:`LineField`, where the shifted support must stay in the box.
    """
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    if isinstance(f, RealField):
        g = f.samples
        for _ in range(order):
            g = np.roll(g, -j) - g
        return RealField(f.grid, g)
    if isinstance(f, LineField):
        h = j * f.dx
        lo, hi = f.support
        new_lo, new_hi = min(lo, lo - order * h), max(hi, hi - order * h)
        if new_lo < -f.A - 1e-12 or new_hi > f.A - f.dx + 1e-12:
            raise ValueError(
                f"shift h={h:g} of order {order} moves the support {f.support} "
                f"outside the box [-{f.A:g}, {f.A:g})")
        g = f.samples
        for _ in range(order):
            g = _shift_zero(g, j) - g
        return LineField(g, f.A, (new_lo, new_hi))
    raise TypeError(f"cannot take differences of {type(f).__name__}")

# }}}


# {{{ besov

def _lp(values: np.ndarray, dx: float, p: float) -> np.ndarray:
    return (dx * np.sum(np.abs(values) ** p, axis=-1)) ** (1.0 / p)


def _spectral_derivatives(samples: np.ndarray, xi: np.ndarray, order: int):
    """Physical-space derivatives of orders ``0..order``."""
    F = np.fft.fft(samples)
    M = samples.shape[0]
    out = [np.asarray(samples, dtype=np.float64)]
    for j in range(1, order + 1):
        mult = (1j ** (j % 4)) * xi ** j
        if j % 2 == 1 and M % 2 == 0:
            mult[M // 2] = 0.0
        out.append(np.fft.ifft(mult * F).real)
    return out


def _trapezoid_weights(n: int, dx: float) -> np.ndarray:
    w = np.full(n, dx)
    if n >= 2:
        w[0] = w[-1] = 0.5 * dx
    return w


def _difference_seminorm(g: np.ndarray, dx: float, shifts: np.ndarray,
                         idx: BesovIndex, periodic: bool) -> float:
    if shifts.size == 0:
        raise ValueError("no resolvable shifts: refine the grid or enlarge delta")
    vals = np.empty(shifts.size)
    for i, j in enumerate(shifts):
        if periodic:
            d2 = np.roll(g, -2 * j) - 2.0 * np.roll(g, -j) + g
        else:
            d2 = _shift_zero(g, 2 * j) - 2.0 * _shift_zero(g, j) + g
        vals[i] = _lp(d2, dx, idx.p)
    h = shifts * dx
    if math.isinf(idx.q):
        return float(np.max(h ** (-idx.s_frac) * vals))
    integrand = h ** (-idx.s_frac * idx.q) * vals ** idx.q / h
    w = _trapezoid_weights(shifts.size, dx)
    return float((2.0 * np.sum(w * integrand)) ** (1.0 / idx.q))


def _besov(samples, xi, dx, shifts, idx, periodic):
    derivs = _spectral_derivatives(samples, xi, idx.s_floor)
    sobolev_part = sum(float(_lp(d, dx, idx.p)) for d in derivs)
    return sobolev_part + _difference_seminorm(derivs[-1], dx, shifts, idx, periodic)


def besov_norm_torus(u: RealField, idx: BesovIndex, delta: float | None = None) -> float:
    """Besov norm on the periodic grid.

    Shifts ``h = j*dx`` for ``j = 1..N/2``, or only ``h <= delta`` when
    ``delta`` is given (an equivalent norm).
    """
    grid = u.grid
    shifts = np.arange(1, grid.N // 2 + 1)
    if delta is not None:
        shifts = shifts[shifts * grid.dx <= delta * (1 + 1e-12)]
    return _besov(u.samples, grid.wavenumbers, grid.dx, shifts, idx, True)


def besov_norm_line(f: LineField, idx: BesovIndex, delta: float = RESTRICTED_DELTA) -> float:
    """Besov norm on the line restricted to shifts ``0 < |h| <= delta``."""
    lo, hi = f.support
    if lo < -f.A + 2 * delta or hi > f.A - 2 * delta:
        raise ValueError(
            f"support {f.support} is closer than 2*delta={2 * delta:g} to the "
            f"edge of the box [-{f.A:g}, {f.A:g})")
    xi = 2.0 * np.pi * np.fft.fftfreq(f.M, f.dx)
    shifts = np.arange(1, int(delta / f.dx * (1 + 1e-12)) + 1)
    return _besov(f.samples, xi, f.dx, shifts, idx, False)

# }}}


# {{{ cutoffs

def smoothstep(t):
    """Degree-17 smoothstep: 0 for ``t <= 0``, 1 for ``t >= 1``, C^8 joins."""
    t = np.clip(np.asarray(t, dtype=np.float64), 0.0, 1.0)
    # the alternating sum cancels badly near t = 1; use S(t) = 1 - S(1 - t)
    upper = t > 0.5
    r = np.where(upper, 1.0 - t, t)
    n = SMOOTHSTEP_ORDER
    acc = np.zeros_like(r)
    for k in range(n + 1):
        acc = acc + math.comb(n + k, k) * math.comb(2 * n + 1, n - k) * (-r) ** k
    low = r ** (n + 1) * acc
    return np.where(upper, 1.0 - low, low)


def smoothstep_derivative(t):
    t = np.asarray(t, dtype=np.float64)
    n = SMOOTHSTEP_ORDER
    c = math.factorial(2 * n + 1) / math.factorial(n) ** 2
    inside = (t > 0) & (t < 1)
    return np.where(inside, c * t ** n * (1.0 - t) ** n, 0.0)


def bump(x):
    """Base cutoff: 1 on ``[-1, 1]``, 0 outside ``(-2, 2)``."""
    return 1.0 - smoothstep(np.abs(np.asarray(x, dtype=np.float64)) - 1.0)


def bump_derivative(x):
    x = np.asarray(x, dtype=np.float64)
    return -np.sign(x) * smoothstep_derivative(np.abs(x) - 1.0)


@dataclass(frozen=True)
class CutoffFunction:
    """``phi_a(x) = phi(x/a)``: 1 on ``[-a, a]``, supported in ``[-2a, 2a]``."""

    a: float

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("dilation a must be positive")

    def __call__(self, x):
        return bump(np.asarray(x) / self.a)

    def derivative(self, x):
        return bump_derivative(np.asarray(x) / self.a) / self.a

    @property
    def support(self) -> tuple:
        return (-2.0 * self.a, 2.0 * self.a)

    def to_line(self, A: float, M: int) -> LineField:
        return LineField.from_function(self, A, M, self.support)


def cutoff_dilate(a: float) -> CutoffFunction:
    return CutoffFunction(a)

# }}}
