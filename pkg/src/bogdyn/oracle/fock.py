"""Occupation-number bases, ladder operators and sparse Hamiltonians.

States are grouped by total particle number (sectors in increasing order) and
ordered lexicographically inside each sector, so a space with a smaller cutoff
is always a prefix of one with a larger cutoff.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from math import comb

import numpy as np
import scipy.sparse as sp

from ..errors import CapacityError, ConfigurationError, ContractError

DEFAULT_MEMORY_CAP = 2_000_000


def sector_dimension(M: int, n: int) -> int:
    return comb(n + M - 1, M - 1)


def _compositions(n: int, M: int) -> np.ndarray:
    """All occupation vectors of ``M`` modes with total ``n``, lexicographically ascending."""
    if M == 1:
        return np.array([[n]], dtype=np.int64)
    bars = np.array(list(combinations(range(n + M - 1), M - 1)), dtype=np.int64).reshape(-1, M - 1)
    edges = np.concatenate([np.full((bars.shape[0], 1), -1), bars, np.full((bars.shape[0], 1), n + M - 1)], axis=1)
    return np.diff(edges, axis=1) - 1


class FockSpace:
    """Truncated bosonic Fock space over ``M`` modes.

    Args:
        M: Number of modes.
        n_max: Largest retained particle number.
        n_min: Smallest retained particle number; ``n_min == n_max`` gives a
            fixed-number sector.
        memory_cap: Maximum number of basis states.

    Raises:
        CapacityError: If the dimension exceeds ``memory_cap``.
    """

    def __init__(self, M: int, n_max: int, n_min: int = 0, memory_cap: int = DEFAULT_MEMORY_CAP):
        if M < 1 or n_max < 0 or not 0 <= n_min <= n_max:
            raise ConfigurationError(f"invalid Fock space M={M}, n_min={n_min}, n_max={n_max}", "oracle")
        self.M = int(M)
        self.n_max = int(n_max)
        self.n_min = int(n_min)
        sizes = [sector_dimension(M, n) for n in range(n_min, n_max + 1)]
        dim = sum(sizes)
        if dim > memory_cap:
            raise CapacityError(dim, memory_cap)
        self.dim = dim
        self.offsets = np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)
        self.states = np.concatenate([_compositions(n, M) for n in range(n_min, n_max + 1)]).reshape(dim, M)
        self.totals = self.states.sum(axis=1)
        self._base = n_max + 1
        self._use_int_keys = M * np.log2(self._base) < 62
        if self._use_int_keys:
            self._weights = self._base ** np.arange(M, dtype=np.int64)
            keys = self.states @ self._weights
            self._order = np.argsort(keys)
            self._sorted_keys = keys[self._order]
        else:
            self._lookup = {row.tobytes(): i for i, row in enumerate(self.states)}

    @classmethod
    def cutoff(cls, M, n_max, memory_cap=DEFAULT_MEMORY_CAP):
        return cls(M, n_max, 0, memory_cap)

    @classmethod
    def fixed(cls, M, N, memory_cap=DEFAULT_MEMORY_CAP):
        return cls(M, N, N, memory_cap)

    @property
    def is_fixed(self) -> bool:
        return self.n_min == self.n_max

    def sector_slice(self, n: int) -> slice:
        if not self.n_min <= n <= self.n_max:
            raise ContractError(f"sector {n} not in [{self.n_min}, {self.n_max}]")
        k = n - self.n_min
        return slice(int(self.offsets[k]), int(self.offsets[k + 1]))

    def index_of(self, occupations) -> np.ndarray:
        """Positions of occupation vectors (rows); ``-1`` marks states outside the space."""
        occ = np.atleast_2d(np.asarray(occupations, dtype=np.int64))
        tot = occ.sum(axis=1)
        inside = np.all(occ >= 0, axis=1) & (tot <= self.n_max) & (tot >= self.n_min)
        out = np.full(occ.shape[0], -1, dtype=np.int64)
        if not np.any(inside):
            return out
        if self._use_int_keys:
            keys = occ[inside] @ self._weights
            pos = np.searchsorted(self._sorted_keys, keys)
            out[inside] = self._order[pos]
        else:
            out[inside] = [self._lookup[row.tobytes()] for row in occ[inside]]
        return out

    def basis_vector(self, occupations) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        i = self.index_of(occupations)[0]
        if i < 0:
            raise ContractError(f"state {occupations} not in the space")
        v[i] = 1.0
        return v

    def vacuum(self) -> np.ndarray:
        return self.basis_vector([0] * self.M)

    @cached_property
    def annihilators(self) -> list:
        """Sparse ``a_i`` for every mode; ``a*_i`` is the conjugate transpose."""
        ops = []
        for i in range(self.M):
            src = np.nonzero(self.states[:, i] > 0)[0]
            tgt_states = self.states[src].copy()
            tgt_states[:, i] -= 1
            tgt = self.index_of(tgt_states)
            keep = tgt >= 0
            data = np.sqrt(self.states[src[keep], i].astype(float))
            ops.append(sp.csr_matrix((data, (tgt[keep], src[keep])), shape=(self.dim, self.dim)))
        return ops

    @cached_property
    def creators(self) -> list:
        return [a.conj().T.tocsr() for a in self.annihilators]

    @cached_property
    def number_diagonal(self) -> np.ndarray:
        return self.totals.astype(float)

    @cached_property
    def _hop_table(self):
        """Matrix elements of ``a*_m a_n`` for all ``m != n`` (rows, cols, amplitude, m, n)."""
        rows, cols, amps, ms, ns = [], [], [], [], []
        S = self.states
        for n in range(self.M):
            src = np.nonzero(S[:, n] > 0)[0]
            for m in range(self.M):
                if m == n or src.size == 0:
                    continue
                tgt_states = S[src].copy()
                tgt_states[:, n] -= 1
                tgt_states[:, m] += 1
                tgt = self.index_of(tgt_states)
                amp = np.sqrt(S[src, n] * (S[src, m] + 1.0))
                rows.append(tgt)
                cols.append(src)
                amps.append(amp)
                ms.append(np.full(src.size, m))
                ns.append(np.full(src.size, n))
        if not rows:
            e = np.zeros(0, dtype=np.int64)
            return e, e, np.zeros(0), e, e
        return tuple(np.concatenate(x) for x in (rows, cols, amps, ms, ns))

    @cached_property
    def _pair_table(self):
        """Matrix elements of ``a*_m a*_n`` for all ordered ``(m, n)`` staying inside the space."""
        rows, cols, amps, ms, ns = [], [], [], [], []
        S = self.states
        room = np.nonzero(self.totals <= self.n_max - 2)[0]
        for m in range(self.M):
            for n in range(self.M):
                tgt_states = S[room].copy()
                tgt_states[:, n] += 1
                amp = np.sqrt(tgt_states[:, n].astype(float))
                tgt_states[:, m] += 1
                amp = amp * np.sqrt(tgt_states[:, m].astype(float))
                tgt = self.index_of(tgt_states)
                keep = tgt >= 0
                rows.append(tgt[keep])
                cols.append(room[keep])
                amps.append(amp[keep])
                ms.append(np.full(keep.sum(), m))
                ns.append(np.full(keep.sum(), n))
        return tuple(np.concatenate(x) for x in (rows, cols, amps, ms, ns))


def assemble_dGamma(H: np.ndarray, space: FockSpace) -> sp.csr_matrix:
    """Second quantisation ``sum_mn H[m, n] a*_m a_n``."""
    H = np.asarray(H)
    if H.shape != (space.M, space.M):
        raise ContractError("one-body operator does not match the number of modes")
    rows, cols, amps, ms, ns = space._hop_table
    diag = space.states @ np.diag(H)
    data = np.concatenate([amps * H[ms, ns], diag])
    idx = np.arange(space.dim)
    return sp.csr_matrix((data, (np.concatenate([rows, idx]), np.concatenate([cols, idx]))), shape=(space.dim, space.dim))


def assemble_pair_ops(K: np.ndarray, space: FockSpace):
    """Return ``(C, C^dagger)`` with ``C = sum_mn K[m, n] a*_m a*_n``.

    Raises:
        ContractError: If ``K`` is not symmetric.
    """
    K = np.asarray(K)
    if K.shape != (space.M, space.M):
        raise ContractError("pair kernel does not match the number of modes")
    if np.max(np.abs(K - K.T), initial=0.0) > 1e-12 * max(1.0, np.max(np.abs(K), initial=0.0)):
        raise ContractError("pair kernel must be symmetric")
    rows, cols, amps, ms, ns = space._pair_table
    C = sp.csr_matrix((amps * K[ms, ns], (rows, cols)), shape=(space.dim, space.dim))
    return C, C.conj().T.tocsr()


def assemble_bogoliubov_H(h: np.ndarray, K2: np.ndarray, space: FockSpace) -> sp.csr_matrix:
    """``dGamma(h) + (1/2)(C + C^dagger)`` on the truncated space."""
    C, Cd = assemble_pair_ops(K2, space)
    return (assemble_dGamma(h, space) + 0.5 * (C + Cd)).tocsr()


def assemble_HN(W: np.ndarray, kinetic: np.ndarray, N: int, space: FockSpace) -> sp.csr_matrix:
    """Mean-field many-body Hamiltonian on a fixed-number sector.

    ``H_N = dGamma(-Delta) + 1/(2(N-1)) sum_mn W[m, n] a*_m a*_n a_n a_m``; the
    interaction is diagonal in occupations, ``n_m n_n - delta_mn n_m``.

    Args:
        W: ``w_N(x_m - x_n)`` on the sites.
        kinetic: ``-Delta`` in the site basis.
        N: Particle number (>= 2).
        space: A fixed-``N`` sector.
    """
    if not (space.is_fixed and space.n_max == N):
        raise ContractError("H_N needs the fixed-N sector")
    if N < 2:
        raise ConfigurationError("N must be at least 2 for H_N", "scaling.N")
    S = space.states.astype(float)
    inter = np.einsum("im,mn,in->i", S, W, S) - S @ np.diag(W)
    H = assemble_dGamma(kinetic, space) + sp.diags(inter / (2.0 * (N - 1)))
    return H.tocsr()


def density_matrices(phi: np.ndarray, space: FockSpace):
    """``gamma[m, n] = <a*_n a_m>`` and ``alpha[m, n] = <a_n a_m>`` of a Fock vector."""
    X = np.stack([a @ phi for a in space.annihilators], axis=1)
    Y = np.stack([ad @ phi for ad in space.creators], axis=1)
    gamma = (X.conj().T @ X).T
    alpha = (Y.conj().T @ X).T
    return 0.5 * (gamma + gamma.conj().T), 0.5 * (alpha + alpha.T)


def product_state(coeffs: np.ndarray, N: int, space: FockSpace) -> np.ndarray:
    """``u^{tensor N}`` in occupation representation, ``sqrt(N!/prod n_i!) prod c_i^n_i``."""
    from scipy.special import gammaln

    if not (space.n_min <= N <= space.n_max):
        raise ContractError("sector not in space")
    c = np.asarray(coeffs, dtype=complex)
    sl = space.sector_slice(N)
    S = space.states[sl]
    logw = 0.5 * (gammaln(N + 1) - np.sum(gammaln(S + 1), axis=1))
    out = np.zeros(space.dim, dtype=complex)
    with np.errstate(divide="ignore"):
        mags = np.exp(logw) * np.prod(np.where(S > 0, c[None, :] ** S, 1.0), axis=1)
    out[sl] = mags
    return out


@dataclass
class FockVector:
    """A state together with the space that interprets its coefficients."""

    space: FockSpace
    coeffs: np.ndarray

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))
