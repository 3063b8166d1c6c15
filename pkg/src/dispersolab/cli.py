"""Command line interface.

Subcommands::

    dispersolab run        --config CFG [--out DIR] [--seed N] [--quiet]
    dispersolab experiment --config CFG [--out DIR] [--seed N] [--quiet]
    dispersolab sweep      --config CFG --set solver.dt=1e-3,5e-4 [--workers K] [--out DIR]
    dispersolab verify     --out DIR

Exit codes: 0 ok, 2 validation (or failed verification), 3 blow-up detected,
4 resolution lost, 5 experiment failed or inconclusive.

When neither ``--out`` nor ``output.directory`` is given, results go to
``$DISPERSOLAB_OUTPUT_ROOT/<hash prefix>`` (default root ``dispersolab_runs``).
"""

from __future__ import annotations

import argparse
import copy
import itertools
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
import yaml

from dispersolab import io, lab
from dispersolab.config import ConfigError, RunConfig, validate_config
from dispersolab.grid import RealField
from dispersolab.presets import band_limited_family, sample_initial, sine_family
from dispersolab.spaces import BesovIndex, CutoffFunction, sobolev_norm
from dispersolab.timestepping import evolve

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_BLOWUP = 3
EXIT_RESOLUTION = 4
EXIT_EXPERIMENT = 5

ENV_OUTPUT_ROOT = "DISPERSOLAB_OUTPUT_ROOT"

TERMINATION_CODES = {
    "completed": EXIT_OK,
    "blowup_detected": EXIT_BLOWUP,
    "resolution_lost": EXIT_RESOLUTION,
}

COMPOSITION_MAPS = {
    "identity": (lambda x: x, lambda x: np.ones_like(x)),
    "x2": (lambda x: x ** 2, lambda x: 2 * x),
    "x3": (lambda x: x ** 3, lambda x: 3 * x ** 2),
    "absx": (lambda x: np.abs(x) * x, lambda x: 2 * np.abs(x)),
}


# {{{ experiments

def _ratio_experiment(name, params, reports: dict) -> lab.ExperimentReport:
    metrics = {}
    for key, rep in reports.items():
        metrics[f"{key}.max_ratio"] = rep.max_ratio
        metrics[f"{key}.min_ratio"] = rep.min_ratio
        metrics[f"{key}.refined_max_ratio"] = max(rep.refined_ratios)
        metrics[f"{key}.stable"] = float(rep.refinement_trend == "stable")
    outcome = "pass" if all(r.passed for r in reports.values()) else "fail"
    return lab.ExperimentReport(name, params, outcome, metrics)


def run_experiment(cfg: RunConfig) -> lab.ExperimentReport:
    exp = cfg.experiment
    name, params = exp["name"], exp["params"]
    prob = cfg.build_problem()
    grid = prob.grid
    if name == "convergence_study":
        method = params["method"] or cfg.solver.method
        return lab.convergence_study(prob, method, params["dt_list"], params["t_end"],
                                     params["declared_order"], cfg.solver.dealias)
    if name == "continuous_dependence":
        w = RealField(grid, sample_initial(params["direction"], grid, cfg.seed))
        return lab.run_continuous_dependence(prob, params["eps"], w, params["T"], cfg.solver)
    if name == "wave_breaking":
        return lab.run_wave_breaking(prob, cfg.solver, params["gradient_ratio"],
                                     params["sup_ratio"])
    if name == "norm_equivalence":
        fam = band_limited_family(params["members"], params["kmax"], cfg.seed,
                                  decay=params["decay"])
        reps = lab.check_norm_equivalence(fam, params["s_list"], grid.N, grid.P)
        return _ratio_experiment(name, params, {f"s={s:g}": r for s, r in reps.items()})
    if name == "localizing":
        fam = sine_family(params["kmax"])
        rho = CutoffFunction(params["cutoff_a"])
        reps = {}
        for triple in params["indices"]:
            idx = BesovIndex(*triple)
            reps[f"({idx.s:g},{idx.p:g},{idx.q:g})"] = lab.check_localizing(
                rho, fam, idx, grid.N, grid.P)
        return _ratio_experiment(name, params, reps)
    if name == "composition":
        f, df = COMPOSITION_MAPS[params["function"]]
        fam = band_limited_family(params["members"], params["kmax"], cfg.seed,
                                  amplitude=tuple(params["amplitude"]))
        rep = lab.check_composition_bound(f, df, fam, BesovIndex(*params["index"]),
                                          grid.N, grid.P)
        return _ratio_experiment(name, params, {params["function"]: rep})
    raise AssertionError(name)

# }}}


# {{{ output handling

def resolve_output(cfg: RunConfig, override=None) -> Path:
    if override is not None:
        return Path(override)
    if cfg.output.get("directory"):
        return Path(cfg.output["directory"])
    root = os.environ.get(ENV_OUTPUT_ROOT, "dispersolab_runs")
    return Path(root) / cfg.hash[:16]


def _write_config(cfg: RunConfig, out: Path) -> Path:
    body = io._jsonable(cfg.to_dict())
    body["config_hash"] = cfg.hash
    path = out / "config.json"
    path.write_text(json.dumps(body, sort_keys=True, indent=2) + "\n")
    return path


def _write_manifest(out: Path, files, chash: str):
    entries = {Path(f).name: io.file_digest(f) for f in files}
    (out / "manifest.json").write_text(
        json.dumps({"config_hash": chash, "files": entries}, sort_keys=True, indent=2) + "\n")


def _summary(traj, prob) -> dict:
    last = traj.diagnostics.rows[-1]
    return {
        "termination": traj.termination,
        "final_time": traj.final_time,
        "steps": traj.steps,
        "final_Hs_norm": sobolev_norm(traj.final, prob.s_index),
        "final_sup_ux": last[3],
        "final_mass": last[4],
        "final_l2": last[5],
        "final_hamiltonian": last[6],
    }

# }}}


def execute(cfg: RunConfig, out: Path, do_evolve=True, do_experiment=True,
            quiet=False) -> int:
    """Run a validated configuration and write its outputs; returns the exit code."""
    chash = cfg.hash
    formats = tuple(cfg.output.get("formats", ("diagnostics", "snapshots", "report")))
    out.mkdir(parents=True, exist_ok=True)
    written = [_write_config(cfg, out)]
    code = EXIT_OK
    lines = []
    if do_evolve:
        prob = cfg.build_problem()
        traj = evolve(prob, cfg.solver)
        written += io.write_series(traj, out, chash, formats)
        summary = _summary(traj, prob)
        if "report" in formats:
            written += io.write_series(summary, out, chash, ("report",), stem="run")
        code = TERMINATION_CODES[traj.termination]
        lines.append(
            f"termination={traj.termination} t={traj.final_time:.6g} "
            f"Hs={summary['final_Hs_norm']:.6g} l2={summary['final_l2']:.6g} "
            f"H={summary['final_hamiltonian']:.6g} hash={chash[:12]}")
    if do_experiment and cfg.experiment is not None:
        report = run_experiment(cfg)
        written += io.write_series(report, out, chash, ("report",), stem=report.name)
        if report.outcome != "pass" and code == EXIT_OK:
            code = EXIT_EXPERIMENT
        lines.append(f"experiment={report.name} outcome={report.outcome} hash={chash[:12]}")
    _write_manifest(out, written, chash)
    if not quiet:
        for line in lines:
            print(line)
    return code


def verify(out: Path) -> list:
    """Re-check hashes in an output directory; returns a list of problems."""
    problems = []
    cfg_path = out / "config.json"
    if not cfg_path.exists():
        return [f"{cfg_path}: missing"]
    body = json.loads(cfg_path.read_text())
    stored = body.pop("config_hash", None)
    try:
        cfg = validate_config({k: v for k, v in body.items() if v is not None})
    except ConfigError as exc:
        return [f"config.json does not validate: {exc}"]
    if cfg.hash != stored:
        problems.append(f"config.json: stored hash {stored} != recomputed {cfg.hash}")
    manifest_path = out / "manifest.json"
    manifest = json.loads(manifest_path.read_text()) if manifest_path.exists() else None
    if manifest is None:
        problems.append("manifest.json: missing")
    elif manifest.get("config_hash") != stored:
        problems.append("manifest.json: config hash mismatch")
    for path in sorted(out.iterdir()):
        if path.name in ("config.json", "manifest.json"):
            continue
        try:
            embedded = io.embedded_hash(path)
        except (ValueError, KeyError, json.JSONDecodeError, OSError) as exc:
            problems.append(f"{path.name}: unreadable ({exc})")
            continue
        if embedded != stored:
            problems.append(f"{path.name}: embedded hash {embedded} != {stored}")
        if manifest is not None:
            want = manifest["files"].get(path.name)
            if want is None:
                problems.append(f"{path.name}: not listed in manifest")
            elif want != io.file_digest(path):
                problems.append(f"{path.name}: content digest changed")
    if manifest is not None:
        for name in manifest["files"]:
            if not (out / name).exists():
                problems.append(f"{name}: listed in manifest but missing")
    return problems


# {{{ sweep

def _set_path(raw: dict, dotted: str, value):
    node = raw
    keys = dotted.split(".")
    for key in keys[:-1]:
        node = node.setdefault(key, {})
    node[keys[-1]] = value


def _parse_value(text: str):
    text = text.strip()
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return yaml.safe_load(text)


def sweep_jobs(raw: dict, assignments) -> list:
    axes = []
    for item in assignments:
        key, sep, values = item.partition("=")
        if not sep:
            raise ConfigError([("--set", f"expected key=v1,v2,..., got {item!r}")])
        axes.append((key.strip(), [_parse_value(v) for v in values.split(",")]))
    jobs = []
    for combo in itertools.product(*(vals for _, vals in axes)):
        job = copy.deepcopy(raw)
        for (key, _), value in zip(axes, combo):
            _set_path(job, key, value)
        jobs.append((dict(zip((k for k, _ in axes), combo)), job))
    return jobs

# }}}


def _load_raw(path):
    try:
        with open(path) as fh:
            return yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        raise ConfigError([("", f"malformed document: {exc}")]) from exc
    except OSError as exc:
        raise ConfigError([("--config", str(exc))]) from exc


def _report_config_error(exc: ConfigError):
    for path, msg in exc.errors:
        print(f"config error at {path or '<root>'}: {msg}", file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="dispersolab", description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)
    helps = {
        "run": "evolve the configured problem (and run its experiment, if any)",
        "experiment": "run only the configured property-lab experiment",
        "sweep": "run the cartesian product of --set overrides, one directory per job",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text, description=text)
        p.add_argument("--config", required=True, metavar="PATH", help="YAML or JSON config")
        p.add_argument("--out", metavar="DIR",
                       help=f"output directory (default: ${ENV_OUTPUT_ROOT}/<hash>)")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--quiet", action="store_true", help="suppress the summary line")
        if name == "sweep":
            p.add_argument("--set", action="append", default=[], dest="assignments",
                           metavar="KEY=V1,V2", help="dotted key and values (repeatable)")
            p.add_argument("--workers", type=int, default=1, help="worker threads")
    p = sub.add_parser("verify", help="re-check config hashes and file digests of a run",
                       description="re-check config hashes and file digests of a run")
    p.add_argument("--out", required=True, metavar="DIR")
    p.add_argument("--quiet", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "verify":
        problems = verify(Path(args.out))
        for p in problems:
            print(p, file=sys.stderr)
        if not args.quiet and not problems:
            print(f"verified {args.out}")
        return EXIT_VALIDATION if problems else EXIT_OK

    try:
        raw = _load_raw(args.config)
        if args.command == "sweep":
            jobs = [(label, validate_config(job)) for label, job in
                    sweep_jobs(raw, args.assignments)]
        else:
            cfg = validate_config(raw)
    except ConfigError as exc:
        _report_config_error(exc)
        return EXIT_VALIDATION

    if args.command == "sweep":
        if args.seed is not None:
            jobs = [(label, c.with_seed(args.seed)) for label, c in jobs]
        root = Path(args.out) if args.out else resolve_output(jobs[0][1]).parent / "sweep"
        def work(i_job):
            i, (label, c) = i_job
            return execute(c, root / f"job_{i:03d}", quiet=True)

        with ThreadPoolExecutor(max_workers=max(1, args.workers)) as pool:
            codes = list(pool.map(work, enumerate(jobs)))
        summary = [{"job": f"job_{i:03d}", "settings": label, "exit_code": code,
                    "config_hash": c.hash} for i, ((label, c), code) in enumerate(zip(jobs, codes))]
        (root / "sweep_summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
        if not args.quiet:
            for row in summary:
                print(f"{row['job']} {row['settings']} exit={row['exit_code']}")
        return max(codes) if codes else EXIT_OK

    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    out = resolve_output(cfg, args.out)
    if args.command == "experiment":
        if cfg.experiment is None:
            _report_config_error(ConfigError([("experiment", "section required for this subcommand")]))
            return EXIT_VALIDATION
        return execute(cfg, out, do_evolve=False, quiet=args.quiet)
    return execute(cfg, out, quiet=args.quiet)


if __name__ == "__main__":
    sys.exit(main())
