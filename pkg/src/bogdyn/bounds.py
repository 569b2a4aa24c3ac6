"""Explicit a-priori envelopes for the pair flow.

With ``h = h1 + h2`` (``h1 = -Delta + 1``) and ``L k = h1 k + k h1^T``:

* ``xi(t) = 6 (||K2|| + ||h2||)`` in operator norm;
* ``Theta(t) = 2||alpha0||^2 + 2||gamma0||^2
  + 2 (||L^-1 k1(t)|| + ||L^-1 k1(0)|| + int_0^t ||k2|| + ||L^-1 dk1/ds|| ds)^2``
  with ``k1 = K2~`` and ``k2 = K2 - K2~`` (Hilbert-Schmidt norms);
* ``E(t) = Theta(t) + int_0^t exp(int_s^t xi) xi(s) Theta(s) ds`` bounds
  ``||alpha(t)||^2 + ||gamma(t)||^2``;
* the same integral applied to ``Theta1 = Theta - 2||alpha0||^2 - 2||gamma0||^2 + 4 (1 + n0)^2``
  bounds ``tr gamma(t)``.

Time integrals use the trapezoid rule on the supplied grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .errors import ContractError

# Envelopes beyond this time reuse the unit-interval formulas and are labelled as extrapolated.
PROVEN_HORIZON = 1.0


def xi_of_t(h2: np.ndarray, K2: np.ndarray) -> float:
    return 6.0 * (float(np.linalg.norm(K2, 2)) + float(np.linalg.norm(h2, 2)))


class InverseL:
    """Solver for ``h1 X + X h1^T = K`` via the eigenbasis of a positive ``h1``."""

    def __init__(self, h1: np.ndarray):
        h1 = np.asarray(h1)
        if np.max(np.abs(h1 - h1.conj().T), initial=0.0) > 1e-10:
            raise ContractError("h1 must be Hermitian")
        lam, V = np.linalg.eigh(0.5 * (h1 + h1.conj().T))
        if lam[0] <= 0:
            raise ContractError(f"h1 must be positive definite (smallest eigenvalue {lam[0]:.3e})")
        self.V = V
        self.denominator = lam[:, None] + lam[None, :]

    def apply(self, K: np.ndarray) -> np.ndarray:
        V = self.V
        return V @ ((V.conj().T @ K @ V.conj()) / self.denominator) @ V.T

    def hs_norm(self, K: np.ndarray) -> float:
        # The norm is basis independent, so skip the back-rotation.
        V = self.V
        return float(np.linalg.norm((V.conj().T @ K @ V.conj()) / self.denominator))


def theta_from_norms(times, l_k1, k2, l_dk1, initial_hs2: float) -> np.ndarray:
    """``Theta`` from pre-computed norm series (see module docstring)."""
    times = np.asarray(times, dtype=float)
    integral = cumulative_trapezoid(np.asarray(k2) + np.asarray(l_dk1), times, initial=0.0)
    l_k1 = np.asarray(l_k1, dtype=float)
    return 2.0 * initial_hs2 + 2.0 * (l_k1 + l_k1[0] + integral) ** 2


def theta_of_t(times, k1_series, k2_series, dk1_series, gamma0, alpha0, h1) -> np.ndarray:
    """Evaluate ``Theta`` at every sample time.

    Args:
        times: Increasing sample times starting at 0.
        k1_series, k2_series, dk1_series: Matrices ``K2~(t)``,
            ``K2(t) - K2~(t)`` and ``dK2~/dt`` at each time.
        gamma0, alpha0: Initial pair.
        h1: Positive, time-independent one-body operator.

    Raises:
        ContractError: If ``h1`` is not positive definite.
    """
    Linv = InverseL(h1)
    l_k1 = [Linv.hs_norm(k) for k in k1_series]
    l_dk1 = [Linv.hs_norm(k) for k in dk1_series]
    k2 = [float(np.linalg.norm(k)) for k in k2_series]
    hs2 = float(np.linalg.norm(gamma0) ** 2 + np.linalg.norm(alpha0) ** 2)
    return theta_from_norms(times, l_k1, k2, l_dk1, hs2)


def gronwall_envelope(times, theta, xi) -> np.ndarray:
    """``Theta(t) + int_0^t exp(int_s^t xi) xi(s) Theta(s) ds`` by the trapezoid rule."""
    times = np.asarray(times, dtype=float)
    theta = np.asarray(theta, dtype=float)
    xi = np.asarray(xi, dtype=float)
    if np.any(xi < 0) or np.any(theta < 0):
        raise ContractError("theta and xi must be non-negative")
    Xi = cumulative_trapezoid(xi, times, initial=0.0)
    out = theta.copy()
    # Row i integrates exp(Xi_i - Xi_j) xi_j Theta_j over j <= i; the O(n^2) form avoids overflow.
    g = xi * theta
    for i in range(1, times.size):
        f = np.exp(Xi[i] - Xi[: i + 1]) * g[: i + 1]
        out[i] += np.trapezoid(f, times[: i + 1])
    return out


def theta1_from_theta(theta, n0: float, initial_hs2: float = 0.0) -> np.ndarray:
    return np.asarray(theta, dtype=float) - 2.0 * initial_hs2 + 4.0 * (1.0 + n0) ** 2


def particle_envelope(times, theta, xi, n0: float, initial_hs2: float = 0.0) -> np.ndarray:
    """Envelope for ``tr gamma(t)``.

    Args:
        times, theta, xi: As for :func:`gronwall_envelope`.
        n0: Initial particle number ``tr gamma(0)``.
        initial_hs2: ``||alpha0||^2 + ||gamma0||^2`` already included in ``theta``.
    """
    return gronwall_envelope(times, theta1_from_theta(theta, n0, initial_hs2), xi)


def log_growth_envelope(times, n0: float, c1: float) -> np.ndarray:
    """Report-only envelope ``c1 (log(1 + t) + 1 + n0)^2``.

    ``c1`` must come from the caller, typically fitted to a measured decay
    profile of ``||u(t)||_inf``; nothing here derives it.
    """
    t = np.asarray(times, dtype=float)
    return c1 * (np.log1p(t) + 1.0 + n0) ** 2


@dataclass
class EnvelopeSeries:
    times: np.ndarray
    xi: np.ndarray
    theta: np.ndarray
    gronwall: np.ndarray
    theta1: np.ndarray
    particle_envelope: np.ndarray

    @property
    def extrapolated(self) -> np.ndarray:
        return self.times > PROVEN_HORIZON + 1e-12


def envelope_series(provider, times, gamma0, alpha0) -> EnvelopeSeries:
    """Compute every envelope on ``times`` from a derivative-enabled kernel provider."""
    times = np.asarray(times, dtype=float)
    if times[0] != 0.0 or np.any(np.diff(times) <= 0):
        raise ContractError("times must start at 0 and increase strictly")
    first = provider(times[0])
    Linv = InverseL(first.h1)
    xi, l_k1, l_dk1, k2 = [], [], [], []
    for t in times:
        k = provider(t)
        if k.dK2_tilde is None:
            raise ContractError("provider must supply dK2_tilde")
        xi.append(xi_of_t(k.h2, k.K2))
        l_k1.append(Linv.hs_norm(k.K2_tilde))
        l_dk1.append(Linv.hs_norm(k.dK2_tilde))
        k2.append(float(np.linalg.norm(k.K2 - k.K2_tilde)))
    hs2 = float(np.linalg.norm(gamma0) ** 2 + np.linalg.norm(alpha0) ** 2)
    n0 = float(np.trace(gamma0).real)
    xi = np.array(xi)
    theta = theta_from_norms(times, l_k1, k2, l_dk1, hs2)
    theta1 = theta1_from_theta(theta, n0, hs2)
    return EnvelopeSeries(times, xi, theta, gronwall_envelope(times, theta, xi), theta1, gronwall_envelope(times, theta1, xi))
