"""Serialization of trajectories and reports.

Diagnostics
    UTF-8 text: ``# config_hash=<sha256>`` then the header line
    ``time,Hs_norm,Hs_minus_norm,sup_ux,mass,l2,hamiltonian`` and one row per
    snapshot, values written with ``repr`` (round-trip exact).
Snapshots
    little-endian binary::

        magic   4s   b"DLSN"
        version u4   1
        N       u4
        P       u4
        time    f8
        hash    64s  config hash, ASCII hex
        samples N * f8

Reports
    JSON with sorted keys and a ``config_hash`` member.
"""

from __future__ import annotations

import hashlib
import json
import math
import struct
from dataclasses import asdict, is_dataclass
from pathlib import Path

import numpy as np

from dispersolab.grid import PeriodicGrid, RealField
from dispersolab.timestepping import DIAGNOSTIC_COLUMNS, Trajectory

SNAPSHOT_MAGIC = b"DLSN"
SNAPSHOT_VERSION = 1
_HEADER = struct.Struct("<4sIIId64s")


def _jsonable(obj):
    if is_dataclass(obj):
        return _jsonable(asdict(obj))
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def canonical_json(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, separators=(",", ":"))


def config_hash(obj) -> str:
    return hashlib.sha256(canonical_json(obj).encode()).hexdigest()


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


# {{{ diagnostics

def diagnostics_text(traj: Trajectory, chash: str) -> str:
    lines = [f"# config_hash={chash}", ",".join(DIAGNOSTIC_COLUMNS)]
    for row in traj.diagnostics.rows:
        lines.append(",".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"


def write_diagnostics(traj: Trajectory, path, chash: str) -> Path:
    path = Path(path)
    path.write_text(diagnostics_text(traj, chash))
    return path


def read_diagnostics(path):
    """Return ``(config_hash, columns, array)``."""
    lines = Path(path).read_text().splitlines()
    chash = lines[0].partition("=")[2]
    columns = tuple(lines[1].split(","))
    rows = [[float(v) for v in line.split(",")] for line in lines[2:] if line]
    return chash, columns, np.array(rows).reshape(-1, len(columns))

# }}}


# {{{ snapshots

def snapshot_bytes(u: RealField, time: float, chash: str) -> bytes:
    header = _HEADER.pack(SNAPSHOT_MAGIC, SNAPSHOT_VERSION, u.grid.N, u.grid.P,
                          float(time), chash.encode("ascii").ljust(64, b"\0"))
    return header + np.asarray(u.samples, dtype="<f8").tobytes()


def write_snapshot(u: RealField, time: float, path, chash: str) -> Path:
    path = Path(path)
    path.write_bytes(snapshot_bytes(u, time, chash))
    return path


def read_snapshot(path):
    """Return ``(field, time, config_hash)``."""
    data = Path(path).read_bytes()
    magic, version, N, P, time, raw = _HEADER.unpack_from(data)
    if magic != SNAPSHOT_MAGIC:
        raise ValueError(f"{path}: not a snapshot file")
    if version != SNAPSHOT_VERSION:
        raise ValueError(f"{path}: unsupported snapshot version {version}")
    samples = np.frombuffer(data, dtype="<f8", count=N, offset=_HEADER.size)
    return (RealField(PeriodicGrid(N, P), samples), time,
            raw.rstrip(b"\0").decode("ascii"))

# }}}


# {{{ reports

def report_text(report, chash: str) -> str:
    body = _jsonable(report)
    body["config_hash"] = chash
    return json.dumps(body, sort_keys=True, indent=2) + "\n"


def write_report(report, path, chash: str) -> Path:
    path = Path(path)
    path.write_text(report_text(report, chash))
    return path


def embedded_hash(path) -> str:
    """Config hash stored inside any output file written by this module."""
    path = Path(path)
    if path.suffix == ".bin":
        return read_snapshot(path)[2]
    if path.suffix == ".csv":
        return read_diagnostics(path)[0]
    return json.loads(path.read_text())["config_hash"]

# }}}


def write_series(obj, out_dir, chash: str, formats=("diagnostics", "snapshots", "report"),
                 stem: str = "run") -> list:
    """Write a trajectory (diagnostics + snapshots) or a report to ``out_dir``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if isinstance(obj, Trajectory):
        if "diagnostics" in formats:
            written.append(write_diagnostics(obj, out_dir / f"{stem}_diagnostics.csv", chash))
        if "snapshots" in formats:
            for i, (t, u) in enumerate(zip(obj.times, obj.snapshots)):
                written.append(write_snapshot(u, t, out_dir / f"{stem}_snap_{i:05d}.bin", chash))
    elif "report" in formats:
        written.append(write_report(obj, out_dir / f"{stem}_report.json", chash))
    return written
