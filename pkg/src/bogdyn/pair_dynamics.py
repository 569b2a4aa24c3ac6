"""Linear evolution of the one-particle density matrix and pairing function.

Conventions: ``gamma[m, n] = <a*_n a_m>`` and ``alpha[m, n] = <a_n a_m>``. For
the quadratic Hamiltonian ``dGamma(h) + (1/2) sum K_mn a*_m a*_n + h.c.`` these
obey

    i dgamma/dt = h gamma - gamma h + K conj(alpha) - alpha conj(K)
    i dalpha/dt = h alpha + alpha h^T + K + K gamma^T + gamma K
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigurationError, ContractError, NumericalBlowupError
from .hartree import step_count
from .kernels import projector_Q


@dataclass
class PairState:
    gamma: np.ndarray
    alpha: np.ndarray
    t: float = 0.0

    @classmethod
    def vacuum(cls, n_modes: int, t: float = 0.0) -> "PairState":
        z = np.zeros((n_modes, n_modes), dtype=complex)
        return cls(z, z.copy(), t)

    def copy(self) -> "PairState":
        return PairState(self.gamma.copy(), self.alpha.copy(), self.t)


def pair_rhs(state: PairState, h: np.ndarray, K2: np.ndarray):
    """Time derivatives ``(dgamma, dalpha)`` of the pair at fixed ``h`` and ``K2``."""
    G, A = state.gamma, state.alpha
    KA = K2 @ A.conj()
    dG = -1j * (h @ G - G @ h + KA - KA.conj().T)
    KG = K2 @ G.T
    dA = -1j * (h @ A + A @ h.T + K2 + KG + KG.T)
    return dG, dA


def _symmetrize(G, A):
    Gs = 0.5 * (G + G.conj().T)
    As = 0.5 * (A + A.T)
    drift = max(float(np.max(np.abs(G - Gs), initial=0.0)), float(np.max(np.abs(A - As), initial=0.0)))
    return Gs, As, drift


def pair_step(state: PairState, provider: Callable[[float], tuple], dt: float):
    """One classical RK4 step followed by exact Hermitian/symmetric projection.

    Args:
        state: Current pair.
        provider: ``t -> (h, K2)``.
        dt: Step size.

    Returns:
        ``(new_state, drift)``, where ``drift`` is the largest entry removed
        by the re-symmetrisation.

    Raises:
        NumericalBlowupError: Non-finite entries after the step.
    """
    t = state.t
    G, A = state.gamma, state.alpha
    h0, K0 = provider(t)
    hm, Km = provider(t + dt / 2)
    h1, K1 = provider(t + dt)
    k1 = pair_rhs(state, h0, K0)
    k2 = pair_rhs(PairState(G + dt / 2 * k1[0], A + dt / 2 * k1[1]), hm, Km)
    k3 = pair_rhs(PairState(G + dt / 2 * k2[0], A + dt / 2 * k2[1]), hm, Km)
    k4 = pair_rhs(PairState(G + dt * k3[0], A + dt * k3[1]), h1, K1)
    Gn = G + dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
    An = A + dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    if not (np.all(np.isfinite(Gn)) and np.all(np.isfinite(An))):
        raise NumericalBlowupError("non-finite pair state", t + dt)
    Gn, An, drift = _symmetrize(Gn, An)
    return PairState(Gn, An, t + dt), drift


def quasi_free_defect(state: PairState):
    """Frobenius norms of ``Y3 = gamma + gamma^2 - alpha conj(alpha)`` and ``Y4 = gamma alpha - alpha gamma^T``."""
    G, A = state.gamma, state.alpha
    y3 = G + G @ G - A @ A.conj()
    y4 = G @ A - A @ G.T
    return float(np.linalg.norm(y3)), float(np.linalg.norm(y4))


def particle_expectation(state: PairState) -> float:
    """Expected particle number ``tr gamma``."""
    return float(np.trace(state.gamma).real)


def min_eig_block(state: PairState) -> float:
    """Smallest eigenvalue of ``[[gamma, alpha], [conj(alpha), 1 + gamma^T]]``."""
    G, A = state.gamma, state.alpha
    M = G.shape[0]
    block = np.block([[G, A], [A.conj(), np.eye(M) + G.T]])
    return float(np.linalg.eigvalsh(0.5 * (block + block.conj().T))[0])


DIAGNOSTIC_COLUMNS = ("trace_gamma", "hs_gamma", "hs_alpha", "y3", "y4", "min_eig_Gamma")


def diagnostics(state: PairState) -> dict:
    y3, y4 = quasi_free_defect(state)
    return {
        "trace_gamma": particle_expectation(state),
        "hs_gamma": float(np.linalg.norm(state.gamma)),
        "hs_alpha": float(np.linalg.norm(state.alpha)),
        "y3": y3,
        "y4": y4,
        "min_eig_Gamma": min_eig_block(state),
    }


@dataclass
class PairTrajectory:
    times: np.ndarray
    states: list
    diagnostics: dict = field(default_factory=dict)
    max_symmetry_drift: float = 0.0
    flags: list = field(default_factory=list)

    @property
    def samples(self):
        return [(float(t), s, {k: v[i] for k, v in self.diagnostics.items()}) for i, (t, s) in enumerate(zip(self.times, self.states))]


# Tolerances for trajectory checks; violations are flagged, never repaired.
ADMISSIBILITY_TOL = 1e-8
POSITIVITY_TOL = 1e-10


def pair_evolve(initial: PairState, provider: Callable[[float], tuple], t_final: float, dt: float, sample_every: int = 1) -> PairTrajectory:
    """Integrate from ``initial.t`` over a duration ``t_final`` with RK4.

    Args:
        initial: Starting pair.
        provider: ``t -> (h, K2)``; see :func:`kernel_source`.
        t_final: Duration, an integer multiple of ``dt``.
        dt: Step size.
        sample_every: Sampling stride; the last step is always recorded.
    """
    if int(sample_every) < 1:
        raise ConfigurationError("sample_every must be >= 1", "time.sample_every")
    n_steps = step_count(t_final, dt)
    t0 = initial.t
    state = PairState(initial.gamma.astype(complex), initial.alpha.astype(complex), t0)
    states, times = [state.copy()], [t0]
    max_drift = 0.0
    for n in range(1, n_steps + 1):
        state, drift = pair_step(state, provider, dt)
        state.t = t0 + n * dt  # avoid accumulating rounding in the clock
        max_drift = max(max_drift, drift)
        if n % sample_every == 0 or n == n_steps:
            states.append(state.copy())
            times.append(state.t)
    diag = {k: [] for k in DIAGNOSTIC_COLUMNS}
    for s in states:
        for k, v in diagnostics(s).items():
            diag[k].append(v)
    diag = {k: np.array(v) for k, v in diag.items()}
    flags = []
    if np.min(diag["min_eig_Gamma"]) < -ADMISSIBILITY_TOL:
        flags.append("admissibility")
    if min(float(np.linalg.eigvalsh(s.gamma)[0]) for s in states) < -POSITIVITY_TOL:
        flags.append("gamma_positivity")
    return PairTrajectory(np.array(times), states, diag, max_drift, flags)


def kernel_source(provider):
    """Adapt a :class:`~bogdyn.kernels.KernelProvider` to the ``t -> (h, K2)`` form."""

    def f(t):
        k = provider(t)
        return k.h, k.K2

    return f


def squeezing_functions(lam: np.ndarray):
    """Pair and pairing matrix generated by a symmetric squeezing matrix ``lam``.

    The state ``exp((1/2) sum lam_mn a*_m a*_n - h.c.) Omega`` has
    ``gamma = sinh^2(sqrt(lam conj(lam)))`` and
    ``alpha = [sinh(2 s) / (2 s)](lam conj(lam)) lam``. It also equals
    ``exp((1/2) a* T a*) Omega`` up to normalisation with
    ``T = [tanh(s) / s](lam conj(lam)) lam``.

    Returns:
        ``(gamma, alpha, T)``.
    """
    lam = np.asarray(lam, dtype=complex)
    if np.max(np.abs(lam - lam.T), initial=0.0) > 1e-12:
        raise ContractError("squeezing matrix must be symmetric")
    P = lam @ lam.conj()
    P = 0.5 * (P + P.conj().T)
    x, U = np.linalg.eigh(P)
    s = np.sqrt(np.clip(x, 0.0, None))
    safe = np.where(s > 0, s, 1.0)
    sinh2 = np.sinh(s) ** 2
    f_alpha = np.where(s > 0, np.sinh(2 * s) / (2 * safe), 1.0)
    f_T = np.where(s > 0, np.tanh(s) / safe, 1.0)

    def fn(vals):
        return (U * vals) @ U.conj().T

    gamma = fn(sinh2)
    gamma = 0.5 * (gamma + gamma.conj().T)
    alpha = fn(f_alpha) @ lam
    T = fn(f_T) @ lam
    return gamma, 0.5 * (alpha + alpha.T), 0.5 * (T + T.T)


def orthogonal_modes(u_coeffs: np.ndarray, count: int) -> np.ndarray:
    """Orthonormal vectors spanning part of ``u^perp``, built from low plane waves.

    Returns an array of shape ``(n_sites, count)``.
    """
    c = np.asarray(u_coeffs, dtype=complex)
    M = c.size
    if not 0 <= count <= M - 1:
        raise ConfigurationError(f"at most {M - 1} modes are orthogonal to u", "initial.pair.r_list")
    freqs = np.fft.fftfreq(M) * M
    order = np.argsort(np.abs(freqs), kind="stable")
    waves = np.exp(2j * np.pi * np.outer(np.arange(M), freqs[order]) / M) / np.sqrt(M)
    Q = projector_Q(c, normalize=True)
    basis = []
    for v in (Q @ waves).T:
        for b in basis:
            v = v - np.vdot(b, v) * b
        n = np.linalg.norm(v)
        if n > 1e-8:
            basis.append(v / n)
        if len(basis) == count:
            break
    return np.array(basis).T.reshape(M, count)


def squeezed_pair(u_coeffs: np.ndarray, r_list, t: float = 0.0) -> PairState:
    """Quasi-free pair with squeezing ``r_k`` in orthonormal modes ``v_k`` orthogonal to ``u``.

    ``gamma = sum sinh^2(r_k) v_k v_k^*`` and
    ``alpha = sum sinh(r_k) cosh(r_k) v_k v_k^T``.
    """
    r = np.asarray(r_list, dtype=float).ravel()
    if np.any(r < 0) or not np.all(np.isfinite(r)):
        raise ConfigurationError("squeezing parameters must be finite and >= 0", "initial.pair.r_list")
    V = orthogonal_modes(u_coeffs, r.size)
    G = (V * np.sinh(r) ** 2) @ V.conj().T
    A = (V * (np.sinh(r) * np.cosh(r))) @ V.T
    return PairState(0.5 * (G + G.conj().T), 0.5 * (A + A.T), t)
