"""Scenario-level comparisons between the exact oracle and the reduced dynamics."""

from __future__ import annotations

import time
import warnings
from dataclasses import asdict, dataclass

import numpy as np
from scipy.sparse.linalg import expm_multiply

from ..errors import AccuracyWarning, ContractError
from ..hartree import HartreeTrajectory, evolve_field
from ..interaction import interaction_matrix
from ..kernels import KernelProvider, kernels_at
from ..pair_dynamics import kernel_source, pair_evolve
from ..scenarios import Scenario, build_scenario, hartree_for_kernels, initial_pair
from .evolve import fock_evolve
from .excitation import ExcitationMap
from .fock import FockSpace, assemble_bogoliubov_H, assemble_HN
from .states import build_quasi_free, extract_density_matrices

RICHARDSON_TOL = 0.05


def bogoliubov_provider(provider: KernelProvider, space: FockSpace):
    """``t -> H(t)`` on ``space`` from a kernel provider."""

    def H(t):
        k = provider(t)
        return assemble_bogoliubov_H(k.h, k.K2, space)

    return H


def top_sector_weight(phi: np.ndarray, space: FockSpace, sectors: int = 2) -> float:
    """Squared norm carried by the highest ``sectors`` particle numbers."""
    return float(np.sum(np.abs(phi[space.totals > space.n_max - sectors]) ** 2))


def initial_fock_state(scn: Scenario, space: FockSpace) -> np.ndarray:
    pair = initial_pair(scn)
    if not np.any(pair.alpha) and not np.any(pair.gamma):
        return space.vacuum()
    return build_quasi_free(space, pair.gamma, pair.alpha).coeffs


@dataclass
class OracleComparison:
    N_max: int
    max_deviation: float
    max_gamma_deviation: float
    max_alpha_deviation: float
    max_top_sector_weight: float
    max_norm_drift: float
    dims: int
    runtime_ms: float

    def to_dict(self):
        return asdict(self)


def compare_oracle(scn: Scenario, N_max: int | None = None, trajectory: HartreeTrajectory | None = None) -> OracleComparison:
    """Max over samples of ``||gamma_pair - gamma_fock||_F + ||alpha_pair - alpha_fock||_F``."""
    start = time.perf_counter()
    N_max = scn.config["oracle"]["N_max"] if N_max is None else N_max
    space = FockSpace.cutoff(scn.lattice.n_sites, N_max, scn.config["oracle"]["memory_cap"])
    traj = hartree_for_kernels(scn) if trajectory is None else trajectory
    provider = KernelProvider(traj, scn.wN)
    every = scn.config["time"]["sample_every"]
    pair = pair_evolve(initial_pair(scn), kernel_source(provider), scn.t_final, scn.dt, every)
    phi0 = initial_fock_state(scn, space)
    times, states = fock_evolve(phi0, bogoliubov_provider(provider, space), scn.t_final, scn.dt, every)
    if not np.allclose(times, pair.times, rtol=0, atol=1e-12):
        raise ContractError("oracle and pair sample grids differ")
    dg, da, top, drift = [], [], 0.0, 0.0
    for phi, ps in zip(states, pair.states):
        fs = extract_density_matrices(phi, space)
        dg.append(np.linalg.norm(fs.gamma - ps.gamma))
        da.append(np.linalg.norm(fs.alpha - ps.alpha))
        top = max(top, top_sector_weight(phi, space))
        drift = max(drift, abs(np.linalg.norm(phi) - 1.0))
    total = np.array(dg) + np.array(da)
    return OracleComparison(
        N_max, float(total.max()), float(max(dg)), float(max(da)), top, drift, space.dim, 1e3 * (time.perf_counter() - start)
    )


def _neighbour_fields(traj: HartreeTrajectory, wN, t: float, delta: float, substeps: int = 8):
    c = traj.coeffs_at(t)
    return evolve_field(c, wN, delta, substeps), evolve_field(c, wN, -delta, substeps)


def generator_residual(scn: Scenario, traj: HartreeTrajectory, N: int, t: float, phi: np.ndarray, delta: float, *, emap: ExcitationMap | None = None) -> float:
    """``||P (G_N - H(t)) phi||`` on the excitation space at time ``t``.

    ``G_N phi = U_N H_N U_N^* phi + i dU_N/dt U_N^* phi`` with the time
    derivative by a central difference of half-width ``delta`` and ``P`` the
    projection onto excitations with at most ``N`` particles orthogonal to
    ``u(t)``.

    Args:
        scn: Scenario providing lattice and potential.
        traj: Hartree trajectory containing ``t``.
        N: Particle number.
        t: Time.
        phi: Excitation vector on the cutoff-``N`` space, orthogonal to ``u(t)``.
        delta: Finite-difference half-width.
        emap: Optional pre-built excitation map at ``u(t)``.
    """
    u = traj.coeffs_at(t)
    emap = ExcitationMap(u, N, scn.config["oracle"]["memory_cap"]) if emap is None else emap
    space = emap.space
    psi = emap.embed(phi)
    fixed = FockSpace.fixed(space.M, N, scn.config["oracle"]["memory_cap"])
    HN = assemble_HN(interaction_matrix(scn.wN), scn.lattice.kinetic, N, fixed)
    up, um = _neighbour_fields(traj, scn.wN, t, delta)
    plus = ExcitationMap(up, N, space=space).decompose(psi)
    minus = ExcitationMap(um, N, space=space).decompose(psi)
    G_phi = emap.decompose(HN @ psi) + 1j * (plus - minus) / (2 * delta)
    k = kernels_at(u, scn.wN, t)
    H_phi = assemble_bogoliubov_H(k.h, k.K2, space) @ phi
    return float(np.linalg.norm(emap.project_plus(G_phi - H_phi)))


@dataclass
class NormScalingResult:
    N: int
    beta: float
    t: float
    error: float
    residual: float
    residual_half_delta: float
    richardson_ok: bool
    leak: float
    leak_flag: bool
    top_sector_weight: float
    dims: dict
    runtime_ms: float

    def to_dict(self):
        return asdict(self)


def _restrict(phi: np.ndarray, big: FockSpace, N: int) -> np.ndarray:
    """Sectors ``<= N`` of ``phi`` laid out on the cutoff-N space (zero padded)."""
    if N <= big.n_max:
        return phi[: int(big.offsets[N + 1])].copy()
    small = FockSpace.cutoff(big.M, N)
    out = np.zeros(small.dim, dtype=complex)
    out[: big.dim] = phi
    return out


def norm_approx_error(config: dict, N: int, beta: float, t: float) -> NormScalingResult:
    """Distance between the exact N-body state and its Bogoliubov approximation at time ``t``.

    Also reports the generator residual on the evolved excitation vector at
    half-widths ``delta`` and ``delta / 2``.
    """
    start = time.perf_counter()
    scn = build_scenario(config, N=N, beta=beta, t_final=t)
    cap = scn.config["oracle"]["memory_cap"]
    M = scn.lattice.n_sites
    traj = hartree_for_kernels(scn)
    provider = KernelProvider(traj, scn.wN)
    big = FockSpace.cutoff(M, scn.config["oracle"]["N_max"], cap)
    phi0 = initial_fock_state(scn, big)
    e0 = ExcitationMap(traj.coeffs_at(0.0), N, cap)
    psi0 = e0.embed(_restrict(phi0, big, N), strict=False)
    fixed = FockSpace.fixed(M, N, cap)
    HN = assemble_HN(interaction_matrix(scn.wN), scn.lattice.kinetic, N, fixed)
    psi_t = expm_multiply(-1j * t * HN, psi0) if t > 0 else psi0
    _, states = fock_evolve(phi0, bogoliubov_provider(provider, big), t, scn.dt, max(1, int(round(t / scn.dt))))
    phi_t = states[-1]
    et = ExcitationMap(traj.coeffs_at(t), N, space=e0.space)
    phi_N = _restrict(phi_t, big, N)
    leak = et.leak(phi_N)
    approx = et.embed(phi_N, strict=False)
    error = float(np.linalg.norm(psi_t - approx))
    delta = scn.config["oracle"]["delta"]
    probe = et.project_plus(phi_N)
    probe /= np.linalg.norm(probe)
    r1 = generator_residual(scn, traj, N, t, probe, delta, emap=et)
    r2 = generator_residual(scn, traj, N, t, probe, delta / 2, emap=et)
    ok = abs(r1 - r2) <= RICHARDSON_TOL * max(r1, r2)
    if not ok:
        warnings.warn(f"generator residual not converged in delta ({r1:.6g} vs {r2:.6g})", AccuracyWarning, stacklevel=2)
    tol = scn.config["oracle"]["leak_tolerance"]
    return NormScalingResult(
        N, float(beta), float(t), error, r2, r1, bool(ok), leak, bool(leak > tol), top_sector_weight(phi_t, big),
        {"fixed_sector": fixed.dim, "fock_cutoff": big.dim, "excitation_space": e0.space.dim}, 1e3 * (time.perf_counter() - start),
    )


def fit_slope(Ns, values) -> float:
    """Least-squares slope of ``log(values)`` against ``log(N)``."""
    x, y = np.log(np.asarray(Ns, float)), np.log(np.asarray(values, float))
    return float(np.polyfit(x, y, 1)[0])
