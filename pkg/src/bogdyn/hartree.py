"""Strang split-step integration of the lattice Hartree equation.

Solves ``i du/dt = (-Delta + w_N * |u|^2 - mu_N(t)) u`` on the periodic lattice.
Each step applies a half potential kick, an exact kinetic step in Fourier
space and a second half kick built from the updated density. All factors are
pure phases, so the mass is conserved to rounding.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, ContractError, NumericalBlowupError
from .interaction import PotentialGrid, mean_field_values, mu_from_coeffs
from .lattice import GridFunction, Lattice, sobolev_norm


def _energy_coeffs(c: np.ndarray, wN: PotentialGrid) -> float:
    lat = wN.lattice
    kinetic = float(np.dot(lat.k_squared, np.abs(lat.forward(c)) ** 2))
    return kinetic + mu_from_coeffs(wN, c)


def hartree_energy(u: GridFunction, wN: PotentialGrid) -> float:
    """``<u, -Delta u> + (1/2) integral |u|^2 (w_N * |u|^2)``."""
    return _energy_coeffs(u.coeffs, wN)


def hartree_generator_apply(coeffs: np.ndarray, wN: PotentialGrid) -> np.ndarray:
    """Apply ``-Delta + w_N * |u|^2 - mu_N`` (evaluated at ``u``) to ``u`` itself."""
    lat = wN.lattice
    V = mean_field_values(wN, coeffs)
    mu = 0.5 * float(np.dot(np.abs(coeffs) ** 2, V))
    return lat.inverse(lat.k_squared * lat.forward(coeffs)) + (V - mu) * coeffs


@dataclass
class HartreeState:
    u: GridFunction
    t: float
    mu: float
    mass0: float
    energy0: float

    @classmethod
    def initial(cls, u0: GridFunction, wN: PotentialGrid, t0: float = 0.0) -> "HartreeState":
        return cls(u0, t0, mu_from_coeffs(wN, u0.coeffs), u0.norm() ** 2, hartree_energy(u0, wN))


def _potential_kick(c, wN, tau, with_mu):
    V = mean_field_values(wN, c)
    mu = 0.5 * float(np.dot(np.abs(c) ** 2, V)) if with_mu else 0.0
    return c * np.exp(-1j * tau * (V - mu)), mu


def _strang(c, wN, dt, kinetic_phase, with_mu=True):
    lat = wN.lattice
    c, _ = _potential_kick(c, wN, dt / 2, with_mu)
    c = lat.inverse(kinetic_phase * lat.forward(c))
    c, _ = _potential_kick(c, wN, dt / 2, with_mu)
    return c


def hartree_step(state: HartreeState, wN: PotentialGrid, dt: float) -> HartreeState:
    """Advance one Strang step of size ``dt`` (negative ``dt`` runs backwards).

    Raises:
        NumericalBlowupError: If the new field is not finite.
    """
    lat = wN.lattice
    c = _strang(state.u.coeffs, wN, dt, np.exp(-1j * dt * lat.k_squared))
    t = state.t + dt
    if not np.all(np.isfinite(c)):
        raise NumericalBlowupError("non-finite Hartree field", t)
    return HartreeState(state.u.with_coeffs(c), t, mu_from_coeffs(wN, c), state.mass0, state.energy0)


@dataclass
class HartreeTrajectory:
    """Sampled Hartree solution.

    Attributes:
        lattice: Common lattice.
        times: Strictly increasing sample times.
        fields: Coefficient vectors, shape ``(n_samples, n_sites)``.
        dt: Integrator step.
        mu: ``mu_N`` at each sample.
        mass: ``||u||^2`` at each sample.
        energy: Hartree energy at each sample.
    """

    lattice: Lattice
    times: np.ndarray
    fields: np.ndarray
    dt: float
    mu: np.ndarray
    mass: np.ndarray
    energy: np.ndarray
    wN: PotentialGrid = field(repr=False)

    def __len__(self):
        return len(self.times)

    def sample(self, i: int) -> GridFunction:
        return GridFunction(self.lattice, self.fields[i])

    @property
    def samples(self):
        return [(float(t), self.sample(i)) for i, t in enumerate(self.times)]

    def coeffs_at(self, t: float, normalize: bool = True) -> np.ndarray:
        """Field at time ``t``; linear interpolation between samples.

        Exact sample times return the stored field unchanged. Interpolated
        fields are renormalised to the initial mass when ``normalize`` is set.
        """
        times = self.times
        tol = 1e-9 * max(1.0, abs(times[-1]))
        if t < times[0] - tol or t > times[-1] + tol:
            raise ContractError(f"t={t} outside trajectory [{times[0]}, {times[-1]}]")
        i = int(np.searchsorted(times, t))
        if i < len(times) and abs(times[i] - t) <= tol:
            return self.fields[i]
        if i > 0 and abs(times[i - 1] - t) <= tol:
            return self.fields[i - 1]
        i = min(max(i, 1), len(times) - 1)
        t0, t1 = times[i - 1], times[i]
        s = (t - t0) / (t1 - t0)
        c = (1 - s) * self.fields[i - 1] + s * self.fields[i]
        if normalize:
            c = c * np.sqrt(self.mass[0]) / np.linalg.norm(c)
        return c

    def max_mass_drift(self) -> float:
        return float(np.max(np.abs(self.mass - self.mass[0])))

    def max_relative_energy_drift(self) -> float:
        scale = max(abs(self.energy[0]), np.finfo(float).tiny)
        return float(np.max(np.abs(self.energy - self.energy[0])) / scale)

    def sobolev_series(self, s: float) -> np.ndarray:
        return np.array([sobolev_norm(self.sample(i), s) for i in range(len(self))])

    def sup_norm_series(self) -> np.ndarray:
        scale = self.lattice.spacing ** (self.lattice.dim / 2)
        return np.max(np.abs(self.fields), axis=1) / scale


def step_count(t_final: float, dt: float) -> int:
    """Number of steps of size ``dt`` covering ``[0, t_final]``; must be integral."""
    if not dt > 0:
        raise ConfigurationError(f"dt must be positive, got {dt!r}", "time.dt")
    if not t_final >= 0:
        raise ConfigurationError(f"t_final must be non-negative, got {t_final!r}", "time.t_final")
    n = int(round(t_final / dt))
    if abs(n * dt - t_final) > 1e-9 * max(1.0, t_final):
        raise ConfigurationError(f"t_final={t_final} is not a multiple of dt={dt}", "time.dt")
    return n


def hartree_evolve(
    u0: GridFunction,
    wN: PotentialGrid,
    t_final: float,
    dt: float,
    sample_every: int = 1,
    *,
    include_mu: bool = True,
) -> HartreeTrajectory:
    """Integrate from ``t = 0`` to ``t_final`` and record every ``sample_every`` steps.

    Args:
        u0: Initial field.
        wN: Scaled potential on the same lattice.
        t_final: End time, an integer multiple of ``dt``.
        dt: Step size.
        sample_every: Sampling stride in steps; the final time is always kept.
        include_mu: Drop the gauge term when False (used for gauge checks).

    Raises:
        NumericalBlowupError: Non-finite values, reported with their time.
    """
    if u0.lattice != wN.lattice:
        raise ContractError("u0 and wN live on different lattices")
    if int(sample_every) < 1:
        raise ConfigurationError("sample_every must be >= 1", "time.sample_every")
    n_steps = step_count(t_final, dt)
    lat = u0.lattice
    phase = np.exp(-1j * dt * lat.k_squared)
    c = u0.coeffs.copy()
    keep = sorted(set(range(0, n_steps + 1, int(sample_every))) | {n_steps})
    times, fields = [], []
    next_keep = iter(keep)
    target = next(next_keep)
    for n in range(n_steps + 1):
        if n == target:
            times.append(n * dt)
            fields.append(c.copy())
            target = next(next_keep, None)
        if n == n_steps:
            break
        c = _strang(c, wN, dt, phase, include_mu)
        if not np.all(np.isfinite(c)):
            raise NumericalBlowupError("non-finite Hartree field", (n + 1) * dt)
    fields = np.array(fields)
    mu = np.array([mu_from_coeffs(wN, f) for f in fields])
    mass = np.sum(np.abs(fields) ** 2, axis=1)
    energy = np.array([_energy_coeffs(f, wN) for f in fields])
    return HartreeTrajectory(lat, np.array(times), fields, float(dt), mu, mass, energy, wN)


def evolve_field(coeffs: np.ndarray, wN: PotentialGrid, tau: float, n_sub: int) -> np.ndarray:
    """Propagate a single field by ``tau`` (either sign) in ``n_sub`` Strang steps."""
    dt = tau / n_sub
    phase = np.exp(-1j * dt * wN.lattice.k_squared)
    c = np.array(coeffs, dtype=complex)
    for _ in range(n_sub):
        c = _strang(c, wN, dt, phase)
    return c


def free_evolution(u0: GridFunction, t: float) -> GridFunction:
    """Exact solution without interaction: each Fourier mode gains ``exp(-i k^2 t)``."""
    lat = u0.lattice
    return u0.with_coeffs(lat.inverse(np.exp(-1j * t * lat.k_squared) * lat.forward(u0.coeffs)))


def initial_field(lattice: Lattice, kind: str, **params) -> GridFunction:
    """Normalised initial condensate wave function.

    Args:
        lattice: Target lattice.
        kind: ``constant``; ``plane_wave`` with integer mode vector ``mode``;
            or ``gaussian_packet`` with ``width``, optional ``center`` (defaults
            to the box centre) and optional integer ``mode`` for a momentum kick.
    """
    x = lattice.coordinates
    L = lattice.box_length
    mode = np.asarray(params.get("mode", [0] * lattice.dim), dtype=float).ravel()
    if mode.size != lattice.dim or np.any(mode != np.round(mode)):
        raise ConfigurationError("mode must be a list of dim integers", "initial.u0.mode")
    carrier = np.exp(1j * (x @ (2 * np.pi * mode / L)))
    if kind == "constant":
        values = np.ones(lattice.n_sites, dtype=complex)
    elif kind == "plane_wave":
        values = carrier
    elif kind == "gaussian_packet":
        width = float(params.get("width", 0.0))
        if not width > 0:
            raise ConfigurationError("width must be positive", "initial.u0.width")
        center = np.asarray(params.get("center", [L / 2] * lattice.dim), dtype=float).ravel()
        if center.size != lattice.dim:
            raise ConfigurationError("center must have dim entries", "initial.u0.center")
        d = (x - center + L / 2) % L - L / 2
        values = np.exp(-np.sum(d**2, axis=1) / (2 * width**2)) * carrier
    else:
        raise ConfigurationError(f"unknown u0 kind {kind!r}", "initial.u0.kind")
    f = GridFunction.from_values(lattice, values)
    return f.with_coeffs(f.coeffs / f.norm())
