"""Run configuration: schema, validation and construction of problems.

A configuration is a YAML (or JSON) mapping::

    seed: 0
    problem:
      symbol: whitham                 # or {name: fractional, alpha: 0.5}
      nonlinearity: power(p=2)        # or {name: power, p: 2}
      u0: gauss(a=0.3,kappa=4)        # or {preset: ..., ...} or {modes: [[k, re, im], ...]}
      N: 256
      P: 1
      s_index: 2.0
    solver:                           # SolverConfig fields
      method: ifrk4_transformed
      dt: 1.0e-3
      t_end: 1.0
    experiment:                       # optional
      name: convergence_study
      params: {dt_list: [4.0e-3, 2.0e-3, 1.0e-3, 5.0e-4]}
    output:
      directory: runs/whitham
      formats: [diagnostics, snapshots, report]

Unknown keys are rejected.  All defaults are filled in and echoed by
:meth:`RunConfig.to_dict`.
"""

from __future__ import annotations

import difflib
import json
import math
from dataclasses import dataclass, fields

import yaml

from dispersolab.equation import (
    NONLINEARITY_NAMES, SYMBOL_NAMES, EvolutionProblem, builtin_nonlinearity,
    builtin_symbol,
)
from dispersolab.grid import PeriodicGrid, RealField
from dispersolab.io import config_hash
from dispersolab.presets import fill_preset, parse_preset_string, sample_initial
from dispersolab.timestepping import METHODS, SolverConfig

FORMATS = ("diagnostics", "snapshots", "report")
TOP_KEYS = ("seed", "problem", "solver", "experiment", "output")
PROBLEM_KEYS = ("symbol", "nonlinearity", "u0", "N", "P", "s_index")
SOLVER_KEYS = tuple(f.name for f in fields(SolverConfig))
OUTPUT_KEYS = ("directory", "formats")

SYMBOL_PARAMS = {"fractional": ("alpha",), "constant": ("c",)}
NONLINEARITY_PARAMS = {"power": ("p",), "signed_power": ("p",)}

EXPERIMENT_DEFAULTS = {
    "convergence_study": {
        "method": None, "dt_list": [4e-3, 2e-3, 1e-3, 5e-4], "t_end": 1.0,
        "declared_order": 4.0,
    },
    "continuous_dependence": {
        "eps": [1e-2, 1e-3, 1e-4], "T": 1.0,
        "direction": {"preset": "cosine", "a": 1.0, "k": 1},
    },
    "wave_breaking": {"gradient_ratio": 50.0, "sup_ratio": 2.0},
    "norm_equivalence": {
        "s_list": [1.75, 2.0, 2.5], "members": 20, "kmax": None, "decay": 1.0,
    },
    "localizing": {
        "indices": [[1.5, 2, 2], [2, 2, 2], [2, 4, 3], [1.75, 2, "inf"]],
        "kmax": 8, "cutoff_a": math.pi,
    },
    "composition": {
        "function": "x2", "index": [2, 2, 2], "members": 12, "kmax": 8,
        "amplitude": [0.5, 2.0],
    },
}

COMPOSITION_FUNCTIONS = ("identity", "x2", "x3", "absx")


class ConfigError(ValueError):
    """Schema violations; ``errors`` holds ``(key_path, message)`` pairs."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(f"{p}: {m}" for p, m in self.errors))


def _suggest(key, allowed):
    close = difflib.get_close_matches(str(key), allowed, n=3)
    hint = f" (did you mean {', '.join(close)}?)" if close else ""
    return f"unknown key{hint}; allowed: {', '.join(allowed)}"


def _check_keys(section: dict, allowed, path, errors):
    if not isinstance(section, dict):
        errors.append((path, "expected a mapping"))
        return False
    for key in section:
        if key not in allowed:
            errors.append((f"{path}.{key}" if path else str(key), _suggest(key, allowed)))
    return True


def _named(value, kind) -> dict:
    """``"power(p=2)"`` or ``{"name": "power", "p": 2}`` -> dict with ``name``."""
    if isinstance(value, str):
        parsed = parse_preset_string(value)
        parsed["name"] = parsed.pop("preset")
        return parsed
    if isinstance(value, dict):
        if "name" not in value:
            raise ValueError(f"{kind} mapping needs a 'name'")
        return dict(value)
    raise ValueError(f"{kind} must be a string or a mapping")


def _float(value):
    if isinstance(value, str) and value.strip().lower() in ("inf", "+inf", ".inf", "infinity"):
        return math.inf
    return float(value)


@dataclass(frozen=True)
class RunConfig:
    problem: dict
    solver: SolverConfig
    experiment: dict | None
    output: dict
    seed: int = 0

    def to_dict(self) -> dict:
        solver = {f.name: getattr(self.solver, f.name) for f in fields(SolverConfig)}
        return {"seed": self.seed, "problem": self.problem, "solver": solver,
                "experiment": self.experiment, "output": self.output}

    @property
    def hash(self) -> str:
        """Hash of everything that determines the numbers (not the output section)."""
        d = self.to_dict()
        d.pop("output")
        return config_hash(d)

    def with_seed(self, seed: int) -> "RunConfig":
        return RunConfig(self.problem, self.solver, self.experiment, self.output, int(seed))

    def with_output(self, directory) -> "RunConfig":
        return RunConfig(self.problem, self.solver, self.experiment,
                         {**self.output, "directory": str(directory)}, self.seed)

    def build_problem(self) -> EvolutionProblem:
        return build_problem(self.problem, self.seed)


def _validate_problem(raw, errors) -> dict:
    path = "problem"
    if raw is None:
        errors.append((path, "missing section"))
        return {}
    if not _check_keys(raw, PROBLEM_KEYS, path, errors):
        return {}
    out = {}
    try:
        sym = _named(raw.get("symbol", "whitham"), "symbol")
        name = sym["name"]
        if name not in SYMBOL_NAMES:
            errors.append((f"{path}.symbol", f"unknown symbol {name!r}; choose from "
                           f"{', '.join(SYMBOL_NAMES)}"))
        else:
            allowed = SYMBOL_PARAMS.get(name, ())
            bad = set(sym) - {"name"} - set(allowed)
            if bad:
                errors.append((f"{path}.symbol", f"unexpected parameters {sorted(bad)}"))
            params = {k: float(v) for k, v in sym.items() if k != "name"}
            builtin_symbol(name, **params)
            out["symbol"] = {"name": name, **params}
    except (ValueError, TypeError) as exc:
        errors.append((f"{path}.symbol", str(exc)))
    try:
        nl = _named(raw.get("nonlinearity", "power(p=2)"), "nonlinearity")
        name = nl["name"]
        if name not in NONLINEARITY_NAMES or name == "custom":
            errors.append((f"{path}.nonlinearity", f"unknown nonlinearity {name!r}; "
                           f"choose from {', '.join(n for n in NONLINEARITY_NAMES if n != 'custom')}"))
        else:
            allowed = NONLINEARITY_PARAMS.get(name, ())
            bad = set(nl) - {"name"} - set(allowed)
            if bad:
                errors.append((f"{path}.nonlinearity", f"unexpected parameters {sorted(bad)}"))
            params = {k: float(v) for k, v in nl.items() if k != "name"}
            if name == "power":
                params["p"] = params.get("p", 2.0)
            builtin_nonlinearity(name, **params)
            if name == "power":
                params["p"] = int(params["p"])
            out["nonlinearity"] = {"name": name, **params}
    except (ValueError, TypeError) as exc:
        errors.append((f"{path}.nonlinearity", str(exc)))
    try:
        u0 = raw.get("u0")
        if u0 is None:
            raise ValueError("missing initial data")
        out["u0"] = fill_preset(parse_preset_string(u0) if isinstance(u0, str) else dict(u0))
    except (ValueError, TypeError) as exc:
        errors.append((f"{path}.u0", str(exc)))
    try:
        N = int(raw.get("N", 256))
        P = int(raw.get("P", 1))
        PeriodicGrid(N, P)
        out["N"], out["P"] = N, P
    except (ValueError, TypeError) as exc:
        errors.append((f"{path}.N", str(exc)))
    try:
        s = float(raw.get("s_index", 2.0))
        if not s > 1.5:
            errors.append((f"{path}.s_index",
                           f"s_index={s:g} violates the well-posedness hypothesis s > 3/2"))
        out["s_index"] = s
    except (ValueError, TypeError) as exc:
        errors.append((f"{path}.s_index", str(exc)))
    return out


def _validate_solver(raw, errors) -> SolverConfig | None:
    raw = {} if raw is None else raw
    if not _check_keys(raw, SOLVER_KEYS, "solver", errors):
        return None
    try:
        kwargs = {}
        for key, value in raw.items():
            if key not in SOLVER_KEYS:
                continue
            if key == "method":
                if value not in METHODS:
                    raise ValueError(f"method must be one of {', '.join(METHODS)}")
                kwargs[key] = value
            elif key == "dealias":
                if not isinstance(value, bool):
                    raise ValueError("dealias must be true or false")
                kwargs[key] = value
            elif key == "snapshot_stride":
                kwargs[key] = int(value)
            else:
                kwargs[key] = float(value)
        return SolverConfig(**kwargs)
    except (ValueError, TypeError) as exc:
        errors.append(("solver", str(exc)))
        return None


def _validate_experiment(raw, problem, errors) -> dict | None:
    if raw is None:
        return None
    if not _check_keys(raw, ("name", "params"), "experiment", errors):
        return None
    name = raw.get("name")
    if name not in EXPERIMENT_DEFAULTS:
        errors.append(("experiment.name", f"unknown experiment {name!r}; choose from "
                       f"{', '.join(EXPERIMENT_DEFAULTS)}"))
        return None
    params = dict(raw.get("params") or {})
    defaults = EXPERIMENT_DEFAULTS[name]
    for key in params:
        if key not in defaults:
            errors.append((f"experiment.params.{key}", _suggest(key, list(defaults))))
    filled = {**defaults, **params}
    path = "experiment.params"
    try:
        if name == "convergence_study":
            if filled["method"] is not None and filled["method"] not in METHODS:
                raise ValueError(f"method must be one of {', '.join(METHODS)}")
            filled["dt_list"] = [float(v) for v in filled["dt_list"]]
            filled["t_end"] = float(filled["t_end"])
            filled["declared_order"] = float(filled["declared_order"])
        elif name == "continuous_dependence":
            filled["eps"] = [float(v) for v in filled["eps"]]
            filled["T"] = float(filled["T"])
            d = filled["direction"]
            filled["direction"] = fill_preset(parse_preset_string(d) if isinstance(d, str) else dict(d))
        elif name == "wave_breaking":
            filled["gradient_ratio"] = float(filled["gradient_ratio"])
            filled["sup_ratio"] = float(filled["sup_ratio"])
        elif name == "norm_equivalence":
            filled["s_list"] = [float(v) for v in filled["s_list"]]
            filled["members"] = int(filled["members"])
            if filled["kmax"] is None:
                filled["kmax"] = max(1, problem.get("N", 256) // 8)
            filled["kmax"] = int(filled["kmax"])
            filled["decay"] = float(filled["decay"])
        elif name == "localizing":
            filled["indices"] = [[_float(v) for v in triple] for triple in filled["indices"]]
            filled["kmax"] = int(filled["kmax"])
            filled["cutoff_a"] = float(filled["cutoff_a"])
        elif name == "composition":
            if filled["function"] not in COMPOSITION_FUNCTIONS:
                raise ValueError(f"function must be one of {', '.join(COMPOSITION_FUNCTIONS)}")
            filled["index"] = [_float(v) for v in filled["index"]]
            filled["members"] = int(filled["members"])
            filled["kmax"] = int(filled["kmax"])
            filled["amplitude"] = [float(v) for v in filled["amplitude"]]
    except (ValueError, TypeError, KeyError) as exc:
        errors.append((path, str(exc)))
    return {"name": name, "params": filled}


def _validate_output(raw, errors) -> dict:
    raw = {} if raw is None else raw
    if not _check_keys(raw, OUTPUT_KEYS, "output", errors):
        return {}
    formats = list(raw.get("formats", FORMATS))
    for f in formats:
        if f not in FORMATS:
            errors.append(("output.formats", f"unknown format {f!r}; allowed: {', '.join(FORMATS)}"))
    directory = raw.get("directory")
    return {"directory": None if directory is None else str(directory), "formats": formats}


def validate_config(raw) -> RunConfig:
    errors = []
    if not isinstance(raw, dict):
        raise ConfigError([("", "configuration must be a mapping")])
    _check_keys(raw, TOP_KEYS, "", errors)
    problem = _validate_problem(raw.get("problem"), errors)
    solver = _validate_solver(raw.get("solver"), errors)
    experiment = _validate_experiment(raw.get("experiment"), problem, errors)
    output = _validate_output(raw.get("output"), errors)
    try:
        seed = int(raw.get("seed", 0))
    except (TypeError, ValueError):
        errors.append(("seed", "must be an integer"))
        seed = 0
    if not errors:
        try:
            build_problem(problem, seed)
        except (ValueError, FloatingPointError) as exc:
            errors.append(("problem", str(exc)))
    if errors:
        raise ConfigError(errors)
    return RunConfig(problem, solver, experiment, output, seed)


def parse_config(text: str) -> RunConfig:
    """Parse and validate a YAML/JSON document."""
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError([("", f"malformed document: {exc}")]) from exc
    return validate_config(raw)


def load_config(path) -> RunConfig:
    with open(path) as fh:
        return parse_config(fh.read())


def build_problem(problem: dict, seed: int = 0) -> EvolutionProblem:
    grid = PeriodicGrid(problem["N"], problem["P"])
    sym = dict(problem["symbol"])
    nl = dict(problem["nonlinearity"])
    u0 = RealField(grid, sample_initial(problem["u0"], grid, seed))
    return EvolutionProblem(grid, builtin_symbol(sym.pop("name"), **sym),
                            builtin_nonlinearity(nl.pop("name"), **nl), u0,
                            problem["s_index"])


def dump_config(cfg: RunConfig) -> str:
    body = cfg.to_dict()
    body["config_hash"] = cfg.hash
    return json.dumps(body, sort_keys=True, indent=2, default=str) + "\n"
