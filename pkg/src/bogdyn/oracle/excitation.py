"""The unitary splitting of N-particle states into condensate and excitations.

A fixed-N state is written as ``sum_n a*(u)^(N-n) / sqrt((N-n)!) psi_n`` with
each ``psi_n`` an n-particle state orthogonal to ``u`` in every slot. The map
is realised by a one-body unitary ``V`` whose first column is ``u``: its
second quantisation ``Gamma(V)`` turns occupation vectors of the rotated modes
``(u, v_1, ..., v_{M-1})`` into site-basis vectors, and in the rotated basis
the map only relabels ``(N - n, s') <-> (0, s')``.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from scipy.linalg import null_space

from ..errors import ContractError
from .fock import DEFAULT_MEMORY_CAP, FockSpace

NORM_TOL = 1e-10


def condensate_frame(u_coeffs: np.ndarray) -> np.ndarray:
    """Unitary matrix whose first column is ``u`` (normalised)."""
    c = np.asarray(u_coeffs, dtype=complex).ravel()
    n = np.linalg.norm(c)
    if abs(n - 1.0) > NORM_TOL:
        raise ContractError(f"u must be normalised (norm {n:.12g})")
    return np.column_stack([c, null_space(c.conj()[None, :])])


def rotation_blocks(V: np.ndarray, space: FockSpace) -> list:
    """Sector blocks of ``Gamma(V)`` on a cutoff space.

    Block ``n`` maps rotated occupation coordinates of sector ``n`` to site
    occupation coordinates of the same sector. Columns are generated by
    ``|s> = b*_j |s - e_j> / sqrt(s_j)`` with ``b*_j = sum_m V[m, j] a*_m`` and
    ``j`` the first occupied rotated mode.
    """
    M = space.M
    creators = space.creators
    B = [sum(V[m, j] * creators[m] for m in range(M)).tocsr() for j in range(M)]
    blocks = [np.ones((1, 1), dtype=complex)]
    for n in range(1, space.n_max + 1):
        sl, prev = space.sector_slice(n), space.sector_slice(n - 1)
        S = space.states[sl]
        first = np.argmax(S > 0, axis=1)
        parents = S.copy()
        parents[np.arange(S.shape[0]), first] -= 1
        parent_idx = space.index_of(parents) - prev.start
        block = np.empty((S.shape[0], S.shape[0]), dtype=complex)
        for j in np.unique(first):
            cols = np.nonzero(first == j)[0]
            Bj = B[j][sl, prev]
            block[:, cols] = (Bj @ blocks[n - 1][:, parent_idx[cols]]) / np.sqrt(S[cols, j])
        blocks.append(block)
    return blocks


class ExcitationMap:
    """``U_N`` for a fixed condensate ``u`` and particle number ``N``.

    Excitation vectors live on ``FockSpace.cutoff(M, N)`` (site basis); fixed-N
    vectors are coefficient arrays on ``FockSpace.fixed(M, N)``, which share the
    ordering of the top sector.
    """

    def __init__(self, u_coeffs: np.ndarray, N: int, memory_cap: int = DEFAULT_MEMORY_CAP, space: FockSpace | None = None):
        c = np.asarray(u_coeffs, dtype=complex).ravel()
        self.N = int(N)
        self.space = space if space is not None else FockSpace.cutoff(c.size, self.N, memory_cap)
        if self.space.M != c.size or self.space.n_max != self.N or self.space.n_min != 0:
            raise ContractError("space must be the cutoff-N space over the lattice modes")
        self.V = condensate_frame(c)
        self.blocks = rotation_blocks(self.V, self.space)
        # For each n: rotated states (0, s') of sector n and their partners (N - n, s') in sector N.
        top = self.space.sector_slice(self.N)
        self._plus, self._partner = [], []
        for n in range(self.N + 1):
            sl = self.space.sector_slice(n)
            S = self.space.states[sl]
            plus = np.nonzero(S[:, 0] == 0)[0]
            partner = S[plus].copy()
            partner[:, 0] = self.N - n
            self._plus.append(plus)
            self._partner.append(self.space.index_of(partner) - top.start)

    @property
    def fixed_dim(self) -> int:
        s = self.space.sector_slice(self.N)
        return s.stop - s.start

    def decompose(self, psiN: np.ndarray) -> np.ndarray:
        """Map a fixed-N vector to its excitation vector on the cutoff-N space."""
        psiN = np.asarray(psiN, dtype=complex)
        if psiN.shape != (self.fixed_dim,):
            raise ContractError(f"expected a fixed-N vector of length {self.fixed_dim}")
        rot = self.blocks[self.N].conj().T @ psiN
        out = np.zeros(self.space.dim, dtype=complex)
        for n in range(self.N + 1):
            sl = self.space.sector_slice(n)
            out[sl] = self.blocks[n][:, self._plus[n]] @ rot[self._partner[n]]
        return out

    def components(self, excitations: np.ndarray) -> list:
        """Split an excitation vector into its sectors ``psi_0..psi_N``."""
        return [excitations[self.space.sector_slice(n)] for n in range(self.N + 1)]

    def _rotated_sectors(self, excitations):
        excitations = np.asarray(excitations, dtype=complex)
        if excitations.shape != (self.space.dim,):
            raise ContractError(f"expected an excitation vector of length {self.space.dim}")
        return [self.blocks[n].conj().T @ excitations[self.space.sector_slice(n)] for n in range(self.N + 1)]

    def leak(self, excitations: np.ndarray) -> float:
        """Norm of the part of ``excitations`` not annihilated by ``a(u)``."""
        total = 0.0
        for n, r in enumerate(self._rotated_sectors(excitations)):
            mask = np.ones(r.size, dtype=bool)
            mask[self._plus[n]] = False
            total += float(np.vdot(r[mask], r[mask]).real)
        return float(np.sqrt(total))

    def project_plus(self, excitations: np.ndarray) -> np.ndarray:
        """Orthogonal projection onto the states annihilated by ``a(u)``."""
        out = np.zeros(self.space.dim, dtype=complex)
        for n, r in enumerate(self._rotated_sectors(excitations)):
            P = self.blocks[n][:, self._plus[n]]
            out[self.space.sector_slice(n)] = P @ r[self._plus[n]]
        return out

    def embed(self, excitations: np.ndarray, *, strict: bool = True, tol: float = 1e-8) -> np.ndarray:
        """Inverse of :meth:`decompose`.

        Components not annihilated by ``a(u)`` are dropped; with ``strict``
        their presence above ``tol`` (relative) raises.

        Raises:
            ContractError: When ``strict`` and the input leaks out of the
                excitation space.
        """
        rot = self._rotated_sectors(excitations)
        if strict:
            leak = self.leak(excitations)
            if leak > tol * max(1.0, float(np.linalg.norm(excitations))):
                raise ContractError(f"excitations are not orthogonal to u (leak {leak:.3e})")
        top = np.zeros(self.fixed_dim, dtype=complex)
        for n in range(self.N + 1):
            top[self._partner[n]] = rot[n][self._plus[n]]
        return self.blocks[self.N] @ top


def excitation_decompose(psiN: np.ndarray, u_coeffs: np.ndarray, N: int) -> list:
    """Components ``psi_0..psi_N`` of a fixed-N vector relative to the condensate ``u``."""
    emap = ExcitationMap(u_coeffs, N)
    return emap.components(emap.decompose(psiN))


def embed_excitations(u_coeffs: np.ndarray, components: list) -> np.ndarray:
    """Fixed-N vector ``sum_n a*(u)^(N-n)/sqrt((N-n)!) psi_n`` from its components."""
    N = len(components) - 1
    emap = ExcitationMap(u_coeffs, N)
    return emap.embed(np.concatenate([np.asarray(c, dtype=complex).ravel() for c in components]))


def creation_along(u_coeffs: np.ndarray, space: FockSpace) -> sp.csr_matrix:
    """Sparse ``a*(u) = sum_m u_m a*_m``."""
    c = np.asarray(u_coeffs, dtype=complex)
    return sum(c[m] * space.creators[m] for m in range(space.M)).tocsr()
