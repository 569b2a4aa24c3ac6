"""JSON simulation configuration: defaults, validation and hashing."""

from __future__ import annotations

import copy
import hashlib
import json
import math
from pathlib import Path

from .errors import ConfigurationError

DEFAULTS = {
    "lattice": {"dim": 1, "points_per_dim": 16, "box_length": 16.0, "allow_non_power_of_two": False},
    "interaction": {"shape": "compact_bump", "params": {"amplitude": 1.0, "radius": 1.0}, "attractive": False},
    "scaling": {"N": 16, "N_list": None, "beta": 0.0},
    "initial": {
        "u0": {"kind": "gaussian_packet", "width": 2.0, "center": None, "mode": None},
        "pair": {"kind": "vacuum", "r_list": []},
    },
    "time": {"t_final": 1.0, "dt": 1e-3, "sample_every": 10, "hartree_dt": None, "max_phase_per_step": math.pi / 4},
    "oracle": {"N_max": 12, "memory_cap": 2_000_000, "delta": 1e-3, "leak_tolerance": 1e-6},
    "output": {"directory": "out", "formats": ["csv", "json"]},
}

OUTPUT_FORMATS = ("csv", "json", "snapshots")


def _merge(defaults: dict, given: dict, path: str) -> dict:
    if not isinstance(given, dict):
        raise ConfigurationError("expected an object", path or "config")
    out = copy.deepcopy(defaults)
    for key, value in given.items():
        sub = f"{path}.{key}" if path else key
        if key not in defaults:
            raise ConfigurationError("unknown field", sub)
        if isinstance(defaults[key], dict) and key != "params":
            out[key] = _merge(defaults[key], value, sub)
        else:
            out[key] = copy.deepcopy(value)
    return out


def _number(cfg, path, *, positive=False, nonneg=False, integer=False, allow_none=False):
    node = cfg
    for part in path.split("."):
        node = node[part]
    if node is None and allow_none:
        return None
    if isinstance(node, bool) or not isinstance(node, (int, float)) or not math.isfinite(node):
        raise ConfigurationError(f"expected a finite number, got {node!r}", path)
    if integer and int(node) != node:
        raise ConfigurationError(f"expected an integer, got {node!r}", path)
    if positive and not node > 0:
        raise ConfigurationError(f"must be positive, got {node!r}", path)
    if nonneg and not node >= 0:
        raise ConfigurationError(f"must be non-negative, got {node!r}", path)
    return int(node) if integer else float(node)


def validate(cfg: dict) -> dict:
    """Range-check every field and return the resolved configuration.

    Raises:
        ConfigurationError: With the dotted path of the first offending field.
    """
    from .hartree import initial_field, step_count
    from .interaction import sample_w, validate_scaling
    from .lattice import build_lattice

    cfg = _merge(DEFAULTS, cfg, "")
    lat_cfg = cfg["lattice"]
    dim = _number(cfg, "lattice.dim", integer=True)
    ppd = _number(cfg, "lattice.points_per_dim", integer=True)
    box = _number(cfg, "lattice.box_length", positive=True)
    if not isinstance(lat_cfg["allow_non_power_of_two"], bool):
        raise ConfigurationError("expected true or false", "lattice.allow_non_power_of_two")
    lattice = build_lattice(dim, ppd, box, strict=not lat_cfg["allow_non_power_of_two"])
    lat_cfg.update(dim=dim, points_per_dim=ppd, box_length=box)

    inter = cfg["interaction"]
    if not isinstance(inter["params"], dict):
        raise ConfigurationError("expected an object", "interaction.params")
    if not isinstance(inter["attractive"], bool):
        raise ConfigurationError("expected true or false", "interaction.attractive")
    sample_w(inter["shape"], inter["params"], lattice, inter["attractive"])

    sc = cfg["scaling"]
    beta = _number(cfg, "scaling.beta")
    N = _number(cfg, "scaling.N", integer=True)
    if N < 2:
        raise ConfigurationError("N must be at least 2", "scaling.N")
    validate_scaling(N, beta, dim)
    sc.update(N=N, beta=beta)
    if sc["N_list"] is not None:
        if not isinstance(sc["N_list"], list) or not sc["N_list"]:
            raise ConfigurationError("expected a non-empty list of integers", "scaling.N_list")
        for i, n in enumerate(sc["N_list"]):
            if isinstance(n, bool) or not isinstance(n, int) or n < 2:
                raise ConfigurationError(f"entries must be integers >= 2, got {n!r}", f"scaling.N_list[{i}]")

    u0 = cfg["initial"]["u0"]
    params = {k: v for k, v in u0.items() if k != "kind" and v is not None}
    initial_field(lattice, u0["kind"], **params)
    pair = cfg["initial"]["pair"]
    if pair["kind"] not in ("vacuum", "squeezed"):
        raise ConfigurationError(f"unknown pair kind {pair['kind']!r}", "initial.pair.kind")
    r_list = pair["r_list"]
    if not isinstance(r_list, list) or any(isinstance(r, bool) or not isinstance(r, (int, float)) or not 0 <= r < 10 for r in r_list):
        raise ConfigurationError("expected a list of squeezing values in [0, 10)", "initial.pair.r_list")
    if len(r_list) > lattice.n_sites - 1:
        raise ConfigurationError(f"at most {lattice.n_sites - 1} squeezed modes fit beside u", "initial.pair.r_list")

    tm = cfg["time"]
    t_final = _number(cfg, "time.t_final", nonneg=True)
    dt = _number(cfg, "time.dt", positive=True)
    sample_every = _number(cfg, "time.sample_every", integer=True, positive=True)
    step_count(t_final, dt)
    hdt = _number(cfg, "time.hartree_dt", positive=True, allow_none=True)
    hdt = dt / 2 if hdt is None else hdt
    ratio = dt / hdt
    if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
        raise ConfigurationError("must divide time.dt into an integer number of steps", "time.hartree_dt")
    max_phase = _number(cfg, "time.max_phase_per_step", positive=True)
    if hdt * float(lattice.k_squared.max()) > max_phase:
        raise ConfigurationError(
            f"hartree step {hdt:g} times max |k|^2 exceeds {max_phase:g}; reduce the step", "time.hartree_dt"
        )
    tm.update(t_final=t_final, dt=dt, sample_every=sample_every, hartree_dt=hdt, max_phase_per_step=max_phase)

    orc = cfg["oracle"]
    orc["N_max"] = _number(cfg, "oracle.N_max", integer=True, positive=True)
    orc["memory_cap"] = _number(cfg, "oracle.memory_cap", integer=True, positive=True)
    orc["delta"] = _number(cfg, "oracle.delta", positive=True)
    orc["leak_tolerance"] = _number(cfg, "oracle.leak_tolerance", positive=True)

    out = cfg["output"]
    if not isinstance(out["directory"], str) or not out["directory"]:
        raise ConfigurationError("expected a non-empty path", "output.directory")
    if not isinstance(out["formats"], list) or any(f not in OUTPUT_FORMATS for f in out["formats"]):
        raise ConfigurationError(f"formats must be drawn from {OUTPUT_FORMATS}", "output.formats")
    return cfg


def load_config(path) -> dict:
    """Read, merge with defaults and validate a JSON config file."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config: {exc}", "config") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"invalid JSON: {exc}", "config") from None
    return validate(raw)


def canonical_json(cfg: dict) -> str:
    return json.dumps(cfg, sort_keys=True, separators=(",", ":"))


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(canonical_json(cfg).encode()).hexdigest()
