"""Turn a validated configuration into lattices, potentials and trajectories."""

from __future__ import annotations

import copy
import warnings
from dataclasses import dataclass, field

import numpy as np

from .bounds import EnvelopeSeries, envelope_series
from .config import validate
from .errors import ResolutionWarning
from .hartree import HartreeTrajectory, hartree_evolve, initial_field
from .interaction import PotentialGrid, sample_w, scale_wN
from .kernels import KernelProvider
from .lattice import GridFunction, Lattice, build_lattice
from .pair_dynamics import PairState, PairTrajectory, kernel_source, pair_evolve, squeezed_pair


@dataclass
class Scenario:
    config: dict
    lattice: Lattice
    w: PotentialGrid
    wN: PotentialGrid
    u0: GridFunction
    N: int
    beta: float
    warnings: list = field(default_factory=list)

    @property
    def t_final(self) -> float:
        return self.config["time"]["t_final"]

    @property
    def dt(self) -> float:
        return self.config["time"]["dt"]

    @property
    def hartree_dt(self) -> float:
        return self.config["time"]["hartree_dt"]


def build_scenario(cfg: dict, N: int | None = None, beta: float | None = None, t_final: float | None = None) -> Scenario:
    """Build a scenario, optionally overriding ``N``, ``beta`` and ``t_final``.

    The overridden configuration is re-validated so every field stays in range.
    """
    cfg = copy.deepcopy(cfg)
    if N is not None:
        cfg["scaling"]["N"] = int(N)
    if beta is not None:
        cfg["scaling"]["beta"] = float(beta)
    if t_final is not None:
        cfg["time"]["t_final"] = float(t_final)
    cfg = validate(cfg)
    lc = cfg["lattice"]
    lattice = build_lattice(lc["dim"], lc["points_per_dim"], lc["box_length"], strict=not lc["allow_non_power_of_two"])
    ic = cfg["interaction"]
    w = sample_w(ic["shape"], ic["params"], lattice, ic["attractive"])
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ResolutionWarning)
        wN = scale_wN(w, cfg["scaling"]["N"], cfg["scaling"]["beta"])
    u0c = cfg["initial"]["u0"]
    u0 = initial_field(lattice, u0c["kind"], **{k: v for k, v in u0c.items() if k != "kind" and v is not None})
    return Scenario(cfg, lattice, w, wN, u0, cfg["scaling"]["N"], cfg["scaling"]["beta"], [str(c.message) for c in caught])


def hartree_for_kernels(scn: Scenario, t_final: float | None = None) -> HartreeTrajectory:
    """Hartree trajectory stored at every Hartree step, as the kernel providers need."""
    t_final = scn.t_final if t_final is None else t_final
    return hartree_evolve(scn.u0, scn.wN, t_final, scn.hartree_dt, 1)


def initial_pair(scn: Scenario) -> PairState:
    pc = scn.config["initial"]["pair"]
    if pc["kind"] == "vacuum" or not pc["r_list"]:
        return PairState.vacuum(scn.lattice.n_sites)
    return squeezed_pair(scn.u0.coeffs, pc["r_list"])


@dataclass
class PairRun:
    scenario: Scenario
    hartree: HartreeTrajectory
    pair: PairTrajectory
    envelopes: EnvelopeSeries

    def envelope_checks(self) -> dict:
        """Strict pointwise envelope inequalities at every sample."""
        d = self.pair.diagnostics
        hs2 = d["hs_alpha"] ** 2 + d["hs_gamma"] ** 2
        ok_hs = hs2 < self.envelopes.gronwall
        ok_n = d["trace_gamma"] < self.envelopes.particle_envelope
        ext = self.envelopes.extrapolated
        return {
            "hs_envelope": bool(np.all(ok_hs)),
            "particle_envelope": bool(np.all(ok_n)),
            "hs_envelope_proven_range": bool(np.all(ok_hs[~ext])),
            "particle_envelope_proven_range": bool(np.all(ok_n[~ext])),
            "min_hs_slack": float(np.min(self.envelopes.gronwall - hs2)),
            "min_particle_slack": float(np.min(self.envelopes.particle_envelope - d["trace_gamma"])),
        }


def run_pair(scn: Scenario) -> PairRun:
    """Hartree trajectory, pair trajectory and envelopes on the pair sample grid."""
    traj = hartree_for_kernels(scn)
    provider = KernelProvider(traj, scn.wN, with_derivative=True)
    init = initial_pair(scn)
    pair = pair_evolve(init, kernel_source(provider), scn.t_final, scn.dt, scn.config["time"]["sample_every"])
    env = envelope_series(provider, pair.times, init.gamma, init.alpha)
    return PairRun(scn, traj, pair, env)


def envelopes_only(scn: Scenario) -> EnvelopeSeries:
    """Envelopes on the pair sample grid without integrating the pair flow."""
    traj = hartree_for_kernels(scn)
    provider = KernelProvider(traj, scn.wN, with_derivative=True)
    init = initial_pair(scn)
    stride = scn.dt * scn.config["time"]["sample_every"]
    n = int(round(scn.t_final / stride))
    times = np.unique(np.append(np.arange(n + 1) * stride, scn.t_final))
    return envelope_series(provider, times, init.gamma, init.alpha)
