"""Pseudospectral simulation of u_t + (n(u))_x + L u_x = 0 and a numerical
function-space lab (Sobolev/Besov norms, composition and localizing checks).
"""

from dispersolab.grid import (
    PeriodicGrid, RealField, SpectralField, make_grid,
    forward_transform, inverse_transform, apply_multiplier, semigroup,
)
from dispersolab.equation import (
    DispersionSymbol, Nonlinearity, EvolutionProblem, BlowUp,
    builtin_symbol, builtin_nonlinearity, rhs_direct, rhs_transformed,
    invariants,
)
from dispersolab.timestepping import (
    SolverConfig, Trajectory, DiagnosticsSeries,
    step_rk4, step_ifrk4, dealias, evolve,
)
from dispersolab.spaces import (
    BesovIndex, LineField, CutoffFunction, difference, sobolev_norm,
    besov_norm_torus, besov_norm_line, cutoff_dilate,
)

__version__ = "0.1.0"

__all__ = (
    "PeriodicGrid", "RealField", "SpectralField", "make_grid",
    "forward_transform", "inverse_transform", "apply_multiplier", "semigroup",

    "DispersionSymbol", "Nonlinearity", "EvolutionProblem", "BlowUp",
    "builtin_symbol", "builtin_nonlinearity", "rhs_direct", "rhs_transformed",
    "invariants",

    "SolverConfig", "Trajectory", "DiagnosticsSeries",
    "step_rk4", "step_ifrk4", "dealias", "evolve",

    "BesovIndex", "LineField", "CutoffFunction", "difference", "sobolev_norm",
    "besov_norm_torus", "besov_norm_line", "cutoff_dilate",
)
