"""Exact-in-space time propagation on truncated Fock spaces."""

from __future__ import annotations

from typing import Callable

import numpy as np
from scipy.linalg import eigh_tridiagonal

from ..errors import ConfigurationError, KrylovConvergenceError, NumericalBlowupError
from ..hartree import step_count


def krylov_expm_apply(H, v: np.ndarray, tau: float, tol: float = 1e-13, max_dim: int = 60) -> np.ndarray:
    """``exp(-i tau H) v`` for Hermitian ``H`` by Lanczos with full reorthogonalisation.

    Stops when the standard a-posteriori estimate
    ``||v|| beta_m |e_m^T exp(-i tau T_m) e_1|`` falls below ``tol * ||v||``.

    Raises:
        KrylovConvergenceError: If ``max_dim`` vectors do not suffice.
    """
    beta0 = float(np.linalg.norm(v))
    if beta0 == 0.0:
        return np.zeros_like(v, dtype=complex)
    n = v.size
    m_cap = min(max_dim, n)
    V = np.empty((m_cap, n), dtype=complex)
    V[0] = v / beta0
    alphas, betas = [], []
    err = np.inf
    for j in range(m_cap):
        w = H @ V[j]
        a = float(np.vdot(V[j], w).real)
        w = w - a * V[j]
        if j > 0:
            w = w - betas[-1] * V[j - 1]
        # Full reorthogonalisation; cheap at these Krylov dimensions.
        w = w - V[: j + 1].T @ (V[: j + 1].conj() @ w)
        b = float(np.linalg.norm(w))
        alphas.append(a)
        lam, S = eigh_tridiagonal(np.array(alphas), np.array(betas)) if j > 0 else (np.array(alphas), np.ones((1, 1)))
        y = S @ (np.exp(-1j * tau * lam) * S[0].conj())
        err = b * abs(y[-1])
        if err <= tol or b <= 1e-14 * max(1.0, abs(a)) or j == n - 1:
            return beta0 * (V[: j + 1].T @ y)
        betas.append(b)
        if j + 1 < m_cap:
            V[j + 1] = w / b
    raise KrylovConvergenceError(err)


def fock_evolve(
    phi0: np.ndarray,
    H_provider: Callable[[float], object],
    t_final: float,
    dt: float,
    sample_every: int = 1,
    *,
    t0: float = 0.0,
    tol: float = 1e-13,
):
    """Midpoint-frozen exponential integrator ``phi <- exp(-i dt H(t + dt/2)) phi``.

    Args:
        phi0: Initial coefficients.
        H_provider: ``t -> sparse Hermitian matrix``.
        t_final: Duration, an integer multiple of ``dt``.
        dt: Step size.
        sample_every: Sampling stride; the final step is always kept.
        t0: Initial time.
        tol: Per-step Krylov tolerance relative to the state norm.

    Returns:
        ``(times, states)`` with ``states`` of shape ``(n_samples, dim)``.
    """
    if int(sample_every) < 1:
        raise ConfigurationError("sample_every must be >= 1", "time.sample_every")
    n_steps = step_count(t_final, dt)
    phi = np.array(phi0, dtype=complex)
    times, states = [t0], [phi.copy()]
    for n in range(n_steps):
        t = t0 + n * dt
        try:
            phi = krylov_expm_apply(H_provider(t + dt / 2), phi, dt, tol)
        except KrylovConvergenceError as exc:
            raise KrylovConvergenceError(exc.residual, t) from None
        if not np.all(np.isfinite(phi)):
            raise NumericalBlowupError("non-finite Fock state", t + dt)
        if (n + 1) % sample_every == 0 or n + 1 == n_steps:
            times.append(t0 + (n + 1) * dt)
            states.append(phi.copy())
    return np.array(times), np.array(states)
