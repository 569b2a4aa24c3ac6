"""Deterministic CSV/JSON writers and the binary field snapshot format.

Snapshot layout (all little-endian):

    magic   4 bytes  b"BGDN"
    version uint32   1
    dim     uint32
    points  uint32   points per dimension
    box     float64  box length
    count   uint32   number of snapshots
    then per snapshot: t float64, followed by n_sites complex64 values
    (interleaved float32 real, imaginary) of the weighted coefficients.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .config import canonical_json, config_hash
from .lattice import Lattice

MAGIC = b"BGDN"
_HEADER = struct.Struct("<4sIIIdI")


def format_float(x) -> str:
    return format(float(x), ".17g")


def write_csv(path, columns: dict, cfg: dict) -> Path:
    """Write equal-length columns with the config hash and echo as comment lines."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names = list(columns)
    data = [np.asarray(columns[n]) for n in names]
    lines = [f"# config_sha256={config_hash(cfg)}", f"# config={canonical_json(cfg)}", ",".join(names)]
    for row in zip(*data):
        lines.append(",".join(str(int(v)) if isinstance(v, (bool, np.bool_)) else format_float(v) for v in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def read_csv(path) -> dict:
    rows = [ln for ln in Path(path).read_text().splitlines() if not ln.startswith("#")]
    names = rows[0].split(",")
    values = np.array([[float(x) for x in r.split(",")] for r in rows[1:]]).reshape(-1, len(names))
    return {n: values[:, i] for i, n in enumerate(names)}


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if np.isfinite(x) else repr(x)
    return x


def write_json(path, payload: dict, cfg: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    body = {"config_sha256": config_hash(cfg), "config": cfg, **_jsonable(payload)}
    path.write_text(json.dumps(body, indent=2, sort_keys=True) + "\n")
    return path


def write_snapshots(path, lattice: Lattice, times, fields) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fields = np.asarray(fields)
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, 1, lattice.dim, lattice.points_per_dim, lattice.box_length, len(times)))
        for t, f in zip(times, fields):
            fh.write(struct.pack("<d", float(t)))
            fh.write(np.asarray(f, dtype="<c8").tobytes())
    return path


def read_snapshots(path):
    """Return ``(dim, points_per_dim, box_length, times, fields)``."""
    raw = Path(path).read_bytes()
    magic, version, dim, points, box, count = _HEADER.unpack_from(raw, 0)
    if magic != MAGIC or version != 1:
        raise ValueError("not a snapshot file")
    n = points**dim
    off = _HEADER.size
    times, fields = [], []
    for _ in range(count):
        times.append(struct.unpack_from("<d", raw, off)[0])
        off += 8
        fields.append(np.frombuffer(raw, dtype="<c8", count=n, offset=off))
        off += 8 * n
    return dim, points, box, np.array(times), np.array(fields)
