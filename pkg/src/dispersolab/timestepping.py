"""Fixed-step time integrators.

Two routes are offered for the same equation:

``rk4_direct``
    classical RK4 on the coefficients of ``u``.
``ifrk4_transformed``
    RK4 on ``v = e^{tL d/dx} u`` (Lawson / integrating-factor RK4).  The
    linear part is integrated exactly by the group, so stiff symbols such as
    KdV's only limit the step through the nonlinear term.

Both are fixed-step by design: convergence studies and cross-method
comparisons rely on identical step sequences, and breaking is detected from
diagnostics rather than from step rejection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields

import numpy as np

from dispersolab.equation import (
    BlowUp, EvolutionProblem, dealias_mask, invariants,
)
from dispersolab.grid import RealField, SpectralField
from dispersolab.spaces import sobolev_norm_coeffs

METHODS = ("rk4_direct", "ifrk4_transformed")
TERMINATIONS = ("completed", "blowup_detected", "resolution_lost")
DIAGNOSTIC_COLUMNS = ("time", "Hs_norm", "Hs_minus_norm", "sup_ux", "mass",
                      "l2", "hamiltonian")
RESOLUTION_ENERGY_FRACTION = 0.01


@dataclass(frozen=True)
class SolverConfig:
    method: str = "ifrk4_transformed"
    dt: float = 1e-3
    t_end: float = 1.0
    dealias: bool = True
    blowup_gradient_factor: float = 1e4
    snapshot_stride: int = 100

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")
        if not self.blowup_gradient_factor > 1:
            raise ValueError("blowup_gradient_factor must exceed 1")
        if int(self.snapshot_stride) != self.snapshot_stride or self.snapshot_stride < 1:
            raise ValueError("snapshot_stride must be a positive integer")

    def replace(self, **changes) -> "SolverConfig":
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update(changes)
        return SolverConfig(**values)


@dataclass
class DiagnosticsSeries:
    """Columns as in :data:`DIAGNOSTIC_COLUMNS`, one row per snapshot."""

    rows: list = field(default_factory=list)

    def append(self, row: dict):
        self.rows.append(tuple(float(row[c]) for c in DIAGNOSTIC_COLUMNS))

    def __len__(self):
        return len(self.rows)

    def column(self, name: str) -> np.ndarray:
        i = DIAGNOSTIC_COLUMNS.index(name)
        return np.array([r[i] for r in self.rows])

    def as_array(self) -> np.ndarray:
        return np.array(self.rows, dtype=np.float64).reshape(-1, len(DIAGNOSTIC_COLUMNS))


@dataclass
class Trajectory:
    times: list
    snapshots: list
    diagnostics: DiagnosticsSeries
    termination: str
    final_time: float
    final: RealField
    steps: int = 0

    @property
    def completed(self) -> bool:
        return self.termination == "completed"


def _check_finite(y, what="stage"):
    a = y.samples if isinstance(y, RealField) else y
    if not np.all(np.isfinite(a)):
        raise BlowUp(f"non-finite values in RK4 {what}")
    return y


def step_rk4(u, t: float, dt: float, rhs):
    """One classical RK4 step for ``du/dt = rhs(t, u)``.

    ``u`` may be a scalar, an array or a :class:`RealField`; ``rhs`` must
    return the same kind.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    half = 0.5 * dt
    k1 = _check_finite(rhs(t, u))
    k2 = _check_finite(rhs(t + half, u + half * k1))
    k3 = _check_finite(rhs(t + half, u + half * k2))
    k4 = _check_finite(rhs(t + dt, u + dt * k3))
    return _check_finite(u + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4), "update")


def step_ifrk4(v: RealField, t: float, dt: float, prob: EvolutionProblem,
               dealias: bool = True) -> RealField:
    """One Lawson RK4 step on the transformed variable ``v``.

    With ``n = 0`` the transformed right-hand side vanishes and ``v`` is
    returned unchanged.
    """
    ops = prob.operators(dealias)
    V = step_rk4(ops.to_spectral(v.samples), t, dt, ops.transformed)
    return RealField(v.grid, ops.to_physical(V))


def dealias(U: SpectralField) -> SpectralField:
    return SpectralField(U.grid, U.coeffs * dealias_mask(U.grid))


def regularity_loss_order(symbol) -> float:
    """``max(1, l+1)``: the time derivative lives in ``H^{s - this}``."""
    return max(1.0, symbol.growth_order + 1.0)


class _Monitor:
    def __init__(self, prob: EvolutionProblem, cfg: SolverConfig, ops):
        self.prob = prob
        self.ops = ops
        grid = prob.grid
        kmax = grid.N // 3 if cfg.dealias else grid.N // 2
        self.top = np.abs(grid.k) * 3 > 2 * kmax
        self.ut_order = prob.s_index - regularity_loss_order(prob.symbol)
        self.sup_ux0 = self.sup_ux(ops.to_spectral(prob.u0.samples))
        self.grad_limit = cfg.blowup_gradient_factor * self.sup_ux0

    def sup_ux(self, U) -> float:
        return float(np.max(np.abs(self.ops.to_physical(self.ops.ik * U))))

    def gradient_tripped(self, sup_ux: float) -> bool:
        return self.sup_ux0 > 0 and sup_ux > self.grad_limit

    def resolution_lost(self, U) -> bool:
        e = np.abs(U) ** 2
        total = e.sum()
        return total > 0 and e[self.top].sum() > RESOLUTION_ENERGY_FRACTION * total

    def row(self, t, U, sup_ux) -> dict:
        xi = self.prob.grid.wavenumbers
        u = RealField(self.prob.grid, self.ops.to_physical(U))
        try:
            ut = self.ops.direct(U)
            ut_norm = sobolev_norm_coeffs(ut, xi, self.ut_order)
        except BlowUp:
            ut_norm = math.inf
        row = {
            "time": t,
            "Hs_norm": sobolev_norm_coeffs(U, xi, self.prob.s_index),
            "Hs_minus_norm": ut_norm,
            "sup_ux": sup_ux,
        }
        row.update(invariants(u, self.prob))
        return row


def evolve(prob: EvolutionProblem, cfg: SolverConfig) -> Trajectory:
    """Integrate from ``prob.u0`` to ``cfg.t_end``.

    Stops early with ``blowup_detected`` when the solution becomes
    non-finite or ``sup|u_x|`` exceeds ``blowup_gradient_factor`` times its
    initial value, and with ``resolution_lost`` when more than 1% of the
    energy sits in the upper third of the retained spectrum.  A state that
    lost resolution is not recorded.
    """
    ops = prob.operators(cfg.dealias)
    mon = _Monitor(prob, cfg, ops)
    grid = prob.grid
    U0 = ops.to_spectral(prob.u0.samples)

    if cfg.method == "rk4_direct":
        rhs = lambda t, Y: ops.direct(Y)
        to_u = lambda t, Y: Y
    else:
        rhs = ops.transformed
        to_u = lambda t, Y: ops.phase(t) * Y

    times, snaps, diags = [], [], DiagnosticsSeries()

    def record(t, U, sup_ux):
        times.append(t)
        snaps.append(RealField(grid, ops.to_physical(U)))
        diags.append(mon.row(t, U, sup_ux))

    record(0.0, U0, mon.sup_ux0)
    n_steps = max(1, math.ceil(cfg.t_end / cfg.dt - 1e-9))
    state, t, U = U0, 0.0, U0
    t_ok = 0.0
    termination = "completed"
    step = 0
    for step in range(1, n_steps + 1):
        t_prev = t
        h = min(cfg.dt, cfg.t_end - t_prev) if step == n_steps else cfg.dt
        try:
            state = step_rk4(state, t_prev, h, rhs)
        except BlowUp:
            termination = "blowup_detected"
            step -= 1
            break
        t = cfg.t_end if step == n_steps else step * cfg.dt
        U_new = to_u(t, state)
        if mon.resolution_lost(U_new):
            termination = "resolution_lost"
            break
        U, t_ok = U_new, t
        sup_ux = mon.sup_ux(U)
        if mon.gradient_tripped(sup_ux):
            record(t, U, sup_ux)
            termination = "blowup_detected"
            break
        if step % cfg.snapshot_stride == 0 or step == n_steps:
            record(t, U, sup_ux)

    final = RealField(grid, ops.to_physical(U))
    return Trajectory(times, snaps, diags, termination, t_ok, final, step)
