"""Numerical checks of inequalities and well-posedness properties.

Inequalities of the form ``lhs <~ rhs`` carry unspecified constants, so
they are tested by computing ``lhs/rhs`` over a declared family, once on a
base grid and once on a grid refined by a factor 2.  A family passes when
all ratios are finite and the largest ratio moves by at most
``REFINEMENT_TOLERANCE`` under the refinement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from dispersolab.equation import EvolutionProblem
from dispersolab.grid import PeriodicGrid, RealField
from dispersolab.io import config_hash
from dispersolab.presets import Family, TrigPolynomial
from dispersolab.spaces import (
    RESTRICTED_DELTA, BesovIndex, CutoffFunction, LineField, besov_norm_line,
    besov_norm_torus, sobolev_norm,
)
from dispersolab.timestepping import SolverConfig, evolve

REFINEMENT_TOLERANCE = 0.2
LIPSCHITZ_SPREAD = 4.0
BREAKING_GRADIENT_RATIO = 50.0
BREAKING_SUP_RATIO = 2.0
ORDER_TOLERANCE = 0.3


@dataclass
class RatioReport:
    family_id: str
    ratios: list
    max_ratio: float
    refinement_trend: str
    min_ratio: float = math.nan
    refined_ratios: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    @property
    def bounded(self) -> bool:
        return bool(np.all(np.isfinite(self.ratios)) and np.isfinite(self.max_ratio))

    @property
    def passed(self) -> bool:
        return self.bounded and self.refinement_trend == "stable"


@dataclass
class ExperimentReport:
    name: str
    parameters: dict
    outcome: str
    metrics: dict
    provenance: str = ""

    def __post_init__(self):
        if self.outcome not in ("pass", "fail", "inconclusive"):
            raise ValueError(f"bad outcome {self.outcome!r}")
        if not self.provenance:
            self.provenance = config_hash({"name": self.name, "parameters": self.parameters})


def _trend(base: float, refined: float) -> str:
    if not (np.isfinite(base) and np.isfinite(refined)) or base <= 0:
        return "growing"
    change = refined / base - 1.0
    if change > REFINEMENT_TOLERANCE:
        return "growing"
    if change < -REFINEMENT_TOLERANCE:
        return "shrinking"
    return "stable"


def _ratio_report(family_id, base, refined, details=None, use_interval=False) -> RatioReport:
    base = [float(r) for r in base]
    refined = [float(r) for r in refined]
    trend = _trend(max(base), max(refined))
    if use_interval and trend == "stable":
        trend = _trend(min(base), min(refined))
    return RatioReport(family_id, base, max(base), trend, min(base), refined,
                       details or {})


def _sample(member, grid: PeriodicGrid) -> RealField:
    if isinstance(member, TrigPolynomial):
        return RealField(grid, member(grid.x, grid.P))
    return RealField(grid, member(grid.x))


def describe_problem(prob: EvolutionProblem) -> dict:
    return {
        "symbol": {"name": prob.symbol.name, **prob.symbol.params},
        "nonlinearity": {"name": prob.nonlinearity.name, **prob.nonlinearity.params},
        "N": prob.grid.N,
        "P": prob.grid.P,
        "s_index": prob.s_index,
        "u0_sha256": config_hash(prob.u0.samples.tobytes().hex()),
    }


# {{{ composition

def line_box(half_support: float, dx: float, delta: float = RESTRICTED_DELTA):
    """Half-width ``A`` and sample count ``M`` (even) of a box that keeps a
    support of half-width ``half_support`` at least ``2*delta`` from its
    edges, with spacing close to ``dx``.
    """
    A = half_support + 2.0 * delta + 0.5
    M = 2 * math.ceil(A / dx)
    return A, M


def composition_derivative_field(f, df, a: float, dx: float,
                                 delta: float = RESTRICTED_DELTA) -> LineField:
    """Samples of ``(f * phi_a)'`` on a line box.

    Uses ``f' phi_a + f phi_a'`` when ``df`` is given, otherwise centered
    differences of ``f phi_a`` with step ``dx/8``.
    """
    phi = CutoffFunction(a)
    A, M = line_box(2.0 * a, dx, delta)
    if df is not None:
        func = lambda x: df(x) * phi(x) + f(x) * phi.derivative(x)
    else:
        step = dx / 8.0
        func = lambda x: (f(x + step) * phi(x + step) - f(x - step) * phi(x - step)) / (2 * step)
    return LineField.from_function(func, A, M, phi.support)


def _composition_ratios(f, df, family, idx, grid, delta):
    ratios, amplitudes = [], []
    expo = idx.s - 1.0 - 1.0 / idx.p
    inner = idx.shifted(-1.0)
    for member in family.members:
        g = _sample(member, grid)
        a = g.max_abs()
        lhs = besov_norm_torus(RealField(grid, f(g.samples)), idx)
        gnorm = besov_norm_torus(g, idx)
        outer = besov_norm_line(composition_derivative_field(f, df, a, grid.dx, delta), inner, delta)
        ratios.append(lhs / (outer * gnorm * (1.0 + gnorm) ** expo))
        amplitudes.append(a)
    return ratios, amplitudes


def check_composition_bound(f, df, family: Family, idx: BesovIndex, N: int = 256,
                            P: int = 1, refine: int = 2,
                            delta: float = RESTRICTED_DELTA) -> RatioReport:
    """Ratios ``||f o g||_{B^s_pq(T)} / (||(f phi_a)'||_{B^{s-1}_pq(R)}
    ||g|| (1 + ||g||)^{s-1-1/p})`` with ``a = max|g|`` per member.
    """
    if not idx.s > 1.0 + 1.0 / idx.p:
        raise ValueError(f"composition bound needs s > 1 + 1/p, got s={idx.s}, p={idx.p}")
    grid = PeriodicGrid(N, P)
    base, amps = _composition_ratios(f, df, family, idx, grid, delta)
    refined, _ = _composition_ratios(f, df, family, idx, grid.refine(refine), delta)
    return _ratio_report(family.family_id, base, refined, {"a": amps})

# }}}


# {{{ localizing

def periodic_extension(u: RealField, A_periods: int) -> tuple:
    """Sample the periodic extension of ``u`` on ``[-A, A)``, ``A = A_periods*pi*P``.

    Returns ``(x, samples, A, M)`` with the same spacing as ``u.grid``.
    """
    grid = u.grid
    M = A_periods * grid.N
    A = A_periods * np.pi * grid.P
    i = np.arange(M)
    offset = (-(A_periods * grid.N) // 2) % grid.N
    samples = u.samples[(i + offset) % grid.N]
    x = -A + i * grid.dx
    return x, samples, A, M


def _localizing_ratios(rho, family, idx, grid, delta):
    lo, hi = rho.support
    half = max(abs(lo), abs(hi)) + 2.0 * delta
    periods = math.ceil(half / (np.pi * grid.P) + 1e-12)
    ratios = []
    for member in family.members:
        u = _sample(member, grid)
        x, fper, A, M = periodic_extension(u, periods)
        inside = (x >= lo) & (x <= hi)
        prod = np.where(inside, rho(x) * fper, 0.0)
        num = besov_norm_line(LineField(prod, A, (lo, hi)), idx, delta)
        ratios.append(num / besov_norm_torus(u, idx))
    return ratios


def check_localizing(rho, family: Family, idx: BesovIndex, N: int = 256, P: int = 1,
                     refine: int = 2, delta: float = RESTRICTED_DELTA) -> RatioReport:
    """Ratios ``||rho f||_{B^s_pq(R)} / ||f||_{B^s_pq(T)}`` for a smooth
    compactly supported ``rho`` (anything with ``__call__`` and ``support``).
    """
    grid = PeriodicGrid(N, P)
    base = _localizing_ratios(rho, family, idx, grid, delta)
    refined = _localizing_ratios(rho, family, idx, grid.refine(refine), delta)
    return _ratio_report(family.family_id, base, refined)

# }}}


# {{{ norm equivalence

def _equivalence_ratios(family, s, grid):
    idx = BesovIndex(s, 2.0, 2.0)
    out = []
    for member in family.members:
        u = _sample(member, grid)
        out.append(besov_norm_torus(u, idx) / sobolev_norm(u, s))
    return out


def check_norm_equivalence(family: Family, s_list, N: int = 256, P: int = 1,
                           refine: int = 2) -> dict:
    """``B^s_22 / H^s`` ratios for each ``s``; the report's
    ``[min_ratio, max_ratio]`` is the empirical equivalence interval and
    both ends must be refinement stable.
    """
    grid = PeriodicGrid(N, P)
    reports = {}
    for s in s_list:
        base = _equivalence_ratios(family, s, grid)
        refined = _equivalence_ratios(family, s, grid.refine(refine))
        rep = _ratio_report(family.family_id, base, refined, use_interval=True)
        rep.details["spread"] = rep.max_ratio / rep.min_ratio
        rep.details["shift"] = max(abs(max(refined) / rep.max_ratio - 1),
                                   abs(min(refined) / rep.min_ratio - 1))
        reports[s] = rep
    return reports

# }}}


# {{{ evolution experiments

def run_continuous_dependence(prob: EvolutionProblem, eps_list, w: RealField, T: float,
                              cfg: SolverConfig | None = None) -> ExperimentReport:
    """``d(eps) = max_t ||u_eps(t) - u(t)||_{H^s}`` for data ``u0 + eps*w``.

    Passes when ``d(eps)/eps`` over the positive ``eps`` varies by at most a
    factor ``LIPSCHITZ_SPREAD``.
    """
    cfg = (cfg or SolverConfig()).replace(t_end=T)
    params = {"problem": describe_problem(prob), "eps": list(eps_list), "T": T,
              "solver": cfg, "w_sha256": config_hash(w.samples.tobytes().hex())}
    ref = evolve(prob, cfg)
    if not ref.completed:
        return ExperimentReport("continuous_dependence", params, "inconclusive",
                                {"reference_termination": ref.termination})
    metrics, ratios = {}, []
    for i, eps in enumerate(eps_list):
        run = evolve(prob.with_u0(prob.u0 + eps * w), cfg)
        if not run.completed:
            metrics[f"termination_{i}"] = run.termination
            return ExperimentReport("continuous_dependence", params, "inconclusive", metrics)
        dist = max(sobolev_norm(a - b, prob.s_index)
                   for a, b in zip(run.snapshots, ref.snapshots))
        metrics[f"d_{i}"] = dist
        if eps > 0:
            ratios.append(dist / eps)
            metrics[f"d_over_eps_{i}"] = dist / eps
    spread = max(ratios) / min(ratios) if ratios else 1.0
    metrics["spread"] = spread
    metrics["w_norm"] = sobolev_norm(w, prob.s_index)
    outcome = "pass" if spread <= LIPSCHITZ_SPREAD else "fail"
    return ExperimentReport("continuous_dependence", params, outcome, metrics)


def run_wave_breaking(prob: EvolutionProblem, cfg: SolverConfig | None = None,
                      gradient_ratio: float = BREAKING_GRADIENT_RATIO,
                      sup_ratio: float = BREAKING_SUP_RATIO) -> ExperimentReport:
    """Integrate until ``sup|u_x|`` grows by ``gradient_ratio``.

    Passes when that happens while ``max|u|`` stays within ``sup_ratio`` of
    its initial value; fails when the horizon is reached without it;
    inconclusive when resolution is lost before the gradient has even
    doubled.
    """
    cfg = (cfg or SolverConfig(t_end=2.0, dt=5e-4, snapshot_stride=20)).replace(
        blowup_gradient_factor=gradient_ratio)
    params = {"problem": describe_problem(prob), "solver": cfg,
              "gradient_ratio": gradient_ratio, "sup_ratio": sup_ratio}
    traj = evolve(prob, cfg)
    grad = traj.diagnostics.column("sup_ux")
    grad = grad / grad[0] if grad[0] > 0 else np.zeros_like(grad)
    u0max = prob.u0.max_abs()
    sups = np.array([s.max_abs() for s in traj.snapshots]) / u0max
    tripped = np.nonzero(grad > gradient_ratio)[0]
    metrics = {
        "termination": traj.termination,
        "final_time": traj.final_time,
        "max_gradient_ratio": float(grad.max()),
        "max_sup_ratio": float(sups.max()),
        "symbol_growth_order": prob.symbol.growth_order,
    }
    if tripped.size:
        first = int(tripped[0])
        metrics["breaking_time"] = traj.times[first]
        metrics["sup_ratio_at_breaking"] = float(sups[:first + 1].max())
        outcome = "pass" if metrics["sup_ratio_at_breaking"] <= sup_ratio else "fail"
    elif traj.termination == "resolution_lost" and grad.max() < 2.0:
        outcome = "inconclusive"
        metrics["hint"] = "resolution lost early; increase N"
    else:
        metrics["breaking_time"] = math.nan
        outcome = "fail"
    return ExperimentReport("wave_breaking", params, outcome, metrics)


def convergence_study(prob: EvolutionProblem, method: str, dt_list, t_end: float = 1.0,
                      declared_order: float = 4.0, dealias: bool = True) -> ExperimentReport:
    """Observed temporal order against a reference run at ``min(dt)/4``.

    Errors are max-norm differences at ``t_end``.  When every error is at
    round-off level (exact linear propagation) the study passes with
    ``exact = 1``.
    """
    dts = sorted((float(d) for d in dt_list), reverse=True)
    if len(dts) < 4:
        raise ValueError("need at least four step sizes")
    for big, small in zip(dts, dts[1:]):
        if not math.isclose(big, 2.0 * small, rel_tol=1e-9):
            raise ValueError("step sizes must form a geometric sequence with ratio 2")
    params = {"problem": describe_problem(prob), "method": method, "dt": dts,
              "t_end": t_end, "declared_order": declared_order}

    def run(dt):
        cfg = SolverConfig(method=method, dt=dt, t_end=t_end, dealias=dealias,
                           snapshot_stride=10 ** 9)
        return evolve(prob, cfg)

    ref = run(dts[-1] / 4.0)
    if not ref.completed:
        return ExperimentReport("convergence_study", params, "inconclusive",
                                {"reference_termination": ref.termination})
    errors = []
    for dt in dts:
        tr = run(dt)
        if not tr.completed:
            return ExperimentReport("convergence_study", params, "inconclusive",
                                    {"termination": tr.termination, "dt": dt})
        errors.append(float(np.max(np.abs(tr.final.samples - ref.final.samples))))
    metrics = {f"error_{i}": e for i, e in enumerate(errors)}
    scale = max(1.0, ref.final.max_abs())
    if max(errors) <= 1e-13 * scale:
        metrics.update(order=math.nan, exact=1.0)
        return ExperimentReport("convergence_study", params, "pass", metrics)
    orders = np.log2(np.array(errors[:-1]) / np.array(errors[1:]))
    order = float(np.median(orders))
    metrics.update({f"order_{i}": float(o) for i, o in enumerate(orders)})
    metrics.update(order=order, exact=0.0)
    outcome = "pass" if abs(order - declared_order) <= ORDER_TOLERANCE else "fail"
    return ExperimentReport("convergence_study", params, outcome, metrics)

# }}}
