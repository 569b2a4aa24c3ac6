"""Command-line entry point: ``bogdyn <subcommand> --config <path> [--out <dir>]``."""

from __future__ import annotations

import argparse
import os
import sys
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .config import load_config, validate
from .errors import CapacityError, ConfigurationError, ContractError, NumericalBlowupError, ResolutionWarning
from .hartree import free_evolution, hartree_evolve
from .io import write_csv, write_json, write_snapshots

EXIT_OK, EXIT_VALIDATION, EXIT_CAPACITY, EXIT_NUMERICAL, EXIT_CHECK = 0, 2, 3, 4, 5

MASS_TOL = 1e-12
ENERGY_TOL = 1e-8
FREE_TOL = 1e-12
QUASI_FREE_TOL = 1e-8
ORACLE_TOL = 1e-4


def _wants(cfg, fmt):
    return fmt in cfg["output"]["formats"]


def cmd_hartree(cfg, out: Path) -> bool:
    from .scenarios import build_scenario

    scn = build_scenario(cfg)
    tm = cfg["time"]
    stride = int(round(tm["dt"] / tm["hartree_dt"])) * tm["sample_every"]
    traj = hartree_evolve(scn.u0, scn.wN, tm["t_final"], tm["hartree_dt"], stride)
    h1 = traj.sobolev_series(1)
    h2 = traj.sobolev_series(2)
    report = {
        "max_mass_drift": traj.max_mass_drift(),
        "max_relative_energy_drift": traj.max_relative_energy_drift(),
        "h2_growth": float(h2.max() / h2[0]),
        "warnings": scn.warnings,
    }
    checks = {"mass": report["max_mass_drift"] <= MASS_TOL, "energy": report["max_relative_energy_drift"] <= ENERGY_TOL}
    if scn.wN.is_zero():
        dev = max(np.max(np.abs(traj.fields[i] - free_evolution(scn.u0, t).coeffs)) for i, t in enumerate(traj.times))
        report["max_free_deviation"] = float(dev)
        checks["free_evolution"] = dev <= FREE_TOL
    report["checks"] = checks
    if _wants(cfg, "csv"):
        write_csv(
            out / "hartree.csv",
            {"t": traj.times, "mass": traj.mass, "energy": traj.energy, "h1": h1, "h2": h2, "sup_norm": traj.sup_norm_series()},
            cfg,
        )
    if _wants(cfg, "snapshots"):
        write_snapshots(out / "hartree_fields.bin", scn.lattice, traj.times, traj.fields)
    write_json(out / "hartree_report.json", report, cfg)
    return all(checks.values())


def _pair_columns(run):
    d = run.pair.diagnostics
    env = run.envelopes
    cols = {"t": run.pair.times, **d}
    cols.update(
        xi=env.xi,
        theta=env.theta,
        gronwall_envelope=env.gronwall,
        theta1=env.theta1,
        particle_envelope=env.particle_envelope,
        extrapolated=env.extrapolated,
    )
    return cols


def cmd_pair(cfg, out: Path) -> bool:
    from .scenarios import build_scenario, run_pair

    run = run_pair(build_scenario(cfg))
    d = run.pair.diagnostics
    report = {
        "max_quasi_free_defect": float(np.max(d["y3"] + d["y4"])),
        "max_symmetry_drift": run.pair.max_symmetry_drift,
        "min_eig_Gamma": float(np.min(d["min_eig_Gamma"])),
        "final_trace_gamma": float(d["trace_gamma"][-1]),
        "flags": run.pair.flags,
        "envelopes": run.envelope_checks(),
        "warnings": run.scenario.warnings,
    }
    checks = {"quasi_free": report["max_quasi_free_defect"] <= QUASI_FREE_TOL, "admissible": not run.pair.flags}
    report["checks"] = checks
    if _wants(cfg, "csv"):
        write_csv(out / "pair.csv", _pair_columns(run), cfg)
    write_json(out / "pair_report.json", report, cfg)
    return all(checks.values())


def cmd_compare_oracle(cfg, out: Path) -> bool:
    from .oracle.scenario import compare_oracle
    from .scenarios import build_scenario

    scn = build_scenario(cfg)
    res = compare_oracle(scn).to_dict()
    res["checks"] = {"oracle_equivalence": res["max_deviation"] <= ORACLE_TOL}
    res["warnings"] = scn.warnings
    write_json(out / "compare_oracle.json", res, cfg)
    return all(res["checks"].values())


def _norm_cell(args):
    cfg, N = args
    from .oracle.scenario import norm_approx_error

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ResolutionWarning)
        return norm_approx_error(cfg, N, cfg["scaling"]["beta"], cfg["time"]["t_final"]).to_dict()


def thread_budget() -> int:
    raw = os.environ.get("BOGDYN_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigurationError(f"BOGDYN_THREADS must be an integer, got {raw!r}", "BOGDYN_THREADS") from None
    if n < 1:
        raise ConfigurationError("BOGDYN_THREADS must be >= 1", "BOGDYN_THREADS")
    return n


def cmd_norm_scaling(cfg, out: Path) -> bool:
    from .oracle.scenario import fit_slope

    Ns = cfg["scaling"]["N_list"] or [cfg["scaling"]["N"]]
    workers = min(thread_budget(), len(Ns))
    cells = [(cfg, N) for N in Ns]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_norm_cell, cells))
    else:
        results = [_norm_cell(c) for c in cells]
    results.sort(key=lambda r: r["N"])
    summary = {"results": results}
    checks = {"richardson": all(r["richardson_ok"] for r in results)}
    if len(results) >= 2:
        Ns_sorted = [r["N"] for r in results]
        summary["error_slope"] = fit_slope(Ns_sorted, [r["error"] for r in results])
        summary["residual_slope"] = fit_slope(Ns_sorted, [r["residual"] for r in results])
        checks["error_decreasing"] = summary["error_slope"] < 0
    summary["checks"] = checks
    if _wants(cfg, "csv"):
        keys = ["N", "beta", "t", "error", "residual", "residual_half_delta", "leak", "top_sector_weight"]
        write_csv(out / "norm_scaling.csv", {k: [r[k] for r in results] for k in keys}, cfg)
    write_json(out / "norm_scaling.json", summary, cfg)
    return all(checks.values())


def cmd_bounds_check(cfg, out: Path) -> bool:
    from .scenarios import build_scenario, run_pair

    run = run_pair(build_scenario(cfg))
    checks = run.envelope_checks()
    passed = {k: v for k, v in checks.items() if isinstance(v, bool)}
    if _wants(cfg, "csv"):
        write_csv(out / "bounds.csv", _pair_columns(run), cfg)
    write_json(out / "bounds_report.json", {"checks": passed, "slack": {k: v for k, v in checks.items() if k not in passed}}, cfg)
    return passed["hs_envelope"] and passed["particle_envelope"]


COMMANDS = {
    "hartree": cmd_hartree,
    "pair": cmd_pair,
    "compare-oracle": cmd_compare_oracle,
    "norm-scaling": cmd_norm_scaling,
    "bounds-check": cmd_bounds_check,
}


def run(subcommand: str, config_path, out_dir=None) -> int:
    """Execute a subcommand and map outcomes onto exit codes."""
    try:
        cfg = load_config(config_path)
        if out_dir is not None:
            cfg["output"]["directory"] = str(out_dir)
            cfg = validate(cfg)
        out = Path(cfg["output"]["directory"])
        start = time.perf_counter()
        ok = COMMANDS[subcommand](cfg, out)
        print(f"{subcommand}: {'pass' if ok else 'FAIL'} ({time.perf_counter() - start:.1f}s) -> {out}")
        return EXIT_OK if ok else EXIT_CHECK
    except (ConfigurationError, ContractError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except NumericalBlowupError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="bogdyn", description=__doc__)
    parser.add_argument("subcommand", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="JSON configuration file")
    parser.add_argument("--out", default=None, help="output directory (overrides output.directory)")
    args = parser.parse_args(argv)
    return run(args.subcommand, args.config, args.out)


if __name__ == "__main__":
    sys.exit(main())
