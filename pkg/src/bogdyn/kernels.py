"""One-body generator and pairing kernel of the quadratic fluctuation Hamiltonian.

All matrices act on weighted site coefficients. With ``W[m, n] = w_N(x_m - x_n)``
and condensate coefficients ``c``:

* ``K1~ = c_m W_mn conj(c_n)``, ``K1 = Q K1~ Q``;
* ``K2~ = c_m W_mn c_n``, ``K2 = Q K2~ Q^T``;
* ``h = -Delta + diag(w_N * |u|^2) - mu_N + K1``, split as ``h1 = -Delta + 1``
  and ``h2 = h - h1``.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

from .errors import ContractError
from .hartree import HartreeTrajectory, hartree_generator_apply
from .interaction import PotentialGrid, interaction_matrix, mean_field_values
from .lattice import GridFunction

NORM_TOL = 1e-10


def _coeffs(u) -> np.ndarray:
    return u.coeffs if isinstance(u, GridFunction) else np.asarray(u, dtype=complex)


def projector_Q(u, normalize: bool = False) -> np.ndarray:
    """``Q = 1 - |u><u|``.

    Raises:
        ContractError: If ``u`` is not normalised and ``normalize`` is False.
    """
    c = _coeffs(u)
    n = np.linalg.norm(c)
    if abs(n - 1.0) > NORM_TOL:
        if not normalize:
            raise ContractError(f"u must be normalised (norm {n:.12g})")
        c = c / n
    return np.eye(c.size) - np.outer(c, c.conj())


def build_K1_tilde(u, wN: PotentialGrid, W: np.ndarray | None = None) -> np.ndarray:
    c = _coeffs(u)
    W = interaction_matrix(wN) if W is None else W
    return c[:, None] * W * c.conj()[None, :]


def build_K2_tilde(u, wN: PotentialGrid, W: np.ndarray | None = None) -> np.ndarray:
    c = _coeffs(u)
    W = interaction_matrix(wN) if W is None else W
    return c[:, None] * W * c[None, :]


def build_K1(u, wN: PotentialGrid) -> np.ndarray:
    """Projected exchange operator ``Q K1~ Q``."""
    Q = projector_Q(u)
    return Q @ build_K1_tilde(u, wN) @ Q


def build_K2(u, wN: PotentialGrid) -> np.ndarray:
    """Projected pairing kernel ``Q K2~ Q^T`` (symmetrised to remove rounding)."""
    Q = projector_Q(u)
    K = Q @ build_K2_tilde(u, wN) @ Q.T
    return 0.5 * (K + K.T)


def build_h(u, wN: PotentialGrid):
    """Return ``(h, h1, h2)`` with ``h1 = -Delta + 1`` and ``h2 = h - h1``."""
    k = kernels_at(_coeffs(u), wN)
    return k.h, k.h1, k.h2


@dataclass
class BogoliubovKernels:
    """Everything the pair flow and the envelopes need at one time."""

    t: float
    coeffs: np.ndarray
    mu: float
    h: np.ndarray
    h1: np.ndarray
    h2: np.ndarray
    K1: np.ndarray
    K2: np.ndarray
    K2_tilde: np.ndarray
    dK2_tilde: np.ndarray | None = None


def kernels_at(coeffs: np.ndarray, wN: PotentialGrid, t: float = 0.0, *, W=None, with_derivative=False) -> BogoliubovKernels:
    """Assemble all kernels from a normalised condensate coefficient vector.

    With ``with_derivative`` the exact time derivative of ``K2~`` along the
    Hartree flow is included, using ``du/dt = -i h_H u``.
    """
    c = np.asarray(coeffs, dtype=complex)
    lat = wN.lattice
    W = interaction_matrix(wN) if W is None else W
    Q = projector_Q(c)
    V = mean_field_values(wN, c)
    mu = 0.5 * float(np.dot(np.abs(c) ** 2, V))
    K1 = Q @ (c[:, None] * W * c.conj()[None, :]) @ Q
    K1 = 0.5 * (K1 + K1.conj().T)
    K2t = c[:, None] * W * c[None, :]
    K2 = Q @ K2t @ Q.T
    K2 = 0.5 * (K2 + K2.T)
    T = lat.kinetic
    eye = np.eye(lat.n_sites)
    h = T + np.diag(V - mu) + K1
    h1 = T + eye
    h2 = np.diag(V - mu - 1.0) + K1
    dK2t = None
    if with_derivative:
        cdot = -1j * hartree_generator_apply(c, wN)
        dK2t = (cdot[:, None] * c[None, :] + c[:, None] * cdot[None, :]) * W
    return BogoliubovKernels(t, c, mu, h, h1, h2, K1, K2, K2t, dK2t)


class KernelProvider:
    """Kernels along a sampled Hartree trajectory, evaluated at arbitrary times.

    Off-sample times use linear interpolation of ``u`` followed by
    renormalisation. Recent evaluations are cached, which matters because
    consecutive Runge-Kutta steps share stage times.
    """

    def __init__(self, trajectory: HartreeTrajectory, wN: PotentialGrid, *, with_derivative=False, cache_size=8):
        if trajectory.lattice != wN.lattice:
            raise ContractError("trajectory and wN live on different lattices")
        self.trajectory = trajectory
        self.wN = wN
        self.W = interaction_matrix(wN)
        self.with_derivative = with_derivative
        self._cache: OrderedDict[float, BogoliubovKernels] = OrderedDict()
        self._cache_size = cache_size

    def __call__(self, t: float) -> BogoliubovKernels:
        key = round(float(t), 12)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        c = self.trajectory.coeffs_at(t)
        k = kernels_at(c, self.wN, t, W=self.W, with_derivative=self.with_derivative)
        self._cache[key] = k
        if len(self._cache) > self._cache_size:
            self._cache.popitem(last=False)
        return k
