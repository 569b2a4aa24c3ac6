"""Quasi-free Fock states, Wick checks and particle-number moments."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from math import factorial

import numpy as np

from ..errors import ContractError, TruncationError
from ..pair_dynamics import PairState, quasi_free_defect, squeezing_functions
from .fock import FockSpace, assemble_pair_ops, density_matrices

ADMISSIBLE_TOL = 1e-10


@dataclass
class QuasiFreeState:
    """A pure quasi-free state built on a truncated space.

    Attributes:
        coeffs: Normalised Fock coefficients.
        gamma, alpha: The target pair the state was built from.
        pairing: Matrix ``T`` with ``state ~ exp((1/2) a* T a*) Omega``.
        truncation_loss: Fraction of the untruncated squared norm missing
            from the retained sectors.
    """

    coeffs: np.ndarray
    gamma: np.ndarray
    alpha: np.ndarray
    pairing: np.ndarray
    truncation_loss: float


def pairing_from_pair(gamma: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    """``T = alpha (1 + gamma^T)^-1`` for an admissible pure pair."""
    M = gamma.shape[0]
    T = np.linalg.solve(np.eye(M) + gamma, alpha.T).T
    return 0.5 * (T + T.T)


def build_quasi_free(space: FockSpace, gamma=None, alpha=None, *, squeezing=None, max_truncation: float | None = None) -> QuasiFreeState:
    """Pure quasi-free state with prescribed ``(gamma, alpha)`` or squeezing matrix.

    The vector is the exponential series ``sum_k (C_T / 2)^k Omega / k!`` with
    ``C_T = sum T_mn a*_m a*_n``, which is exact sector by sector up to the
    cutoff, then normalised.

    Raises:
        ContractError: Target pair is not pure quasi-free.
        TruncationError: ``max_truncation`` is given and exceeded.
    """
    M = space.M
    if squeezing is not None:
        gamma, alpha, T = squeezing_functions(squeezing)
    else:
        gamma = np.zeros((M, M), complex) if gamma is None else np.asarray(gamma, dtype=complex)
        alpha = np.zeros((M, M), complex) if alpha is None else np.asarray(alpha, dtype=complex)
        y3, y4 = quasi_free_defect(PairState(gamma, alpha))
        scale = 1.0 + np.linalg.norm(gamma) + np.linalg.norm(alpha)
        if y3 > ADMISSIBLE_TOL * scale**2 or y4 > ADMISSIBLE_TOL * scale**2:
            raise ContractError(f"target pair is not pure quasi-free (|Y3|={y3:.2e}, |Y4|={y4:.2e})")
        T = pairing_from_pair(gamma, alpha)
    if space.n_min != 0:
        raise ContractError("quasi-free states need a cutoff space starting at the vacuum")
    C, _ = assemble_pair_ops(T, space)
    term = space.vacuum()
    phi = term.copy()
    for k in range(1, space.n_max // 2 + 1):
        term = (C @ term) / (2.0 * k)
        phi += term
    norm2 = float(np.vdot(phi, phi).real)
    sv = np.linalg.svd(T, compute_uv=False)
    if np.any(sv >= 1):
        raise ContractError("pairing matrix must have norm < 1")
    exact = float(np.prod(1.0 - sv**2) ** -0.5)
    loss = max(0.0, 1.0 - norm2 / exact)
    if max_truncation is not None and loss > max_truncation:
        raise TruncationError(loss, max_truncation)
    return QuasiFreeState(phi / np.sqrt(norm2), gamma, alpha, T, loss)


def extract_density_matrices(phi: np.ndarray, space: FockSpace, t: float = 0.0) -> PairState:
    gamma, alpha = density_matrices(phi, space)
    return PairState(gamma, alpha, t)


def _letters(space: FockSpace):
    """Operators ``a_0..a_{M-1}, a*_0..a*_{M-1}`` and the index of each adjoint."""
    M = space.M
    ops = list(space.annihilators) + list(space.creators)
    adjoint = [i + M for i in range(M)] + list(range(M))
    return ops, adjoint


@dataclass
class WickReport:
    defect: float
    odd_max: float
    even_max: float
    worst_word: tuple


def wick_defect(phi: np.ndarray, space: FockSpace, max_length: int = 4) -> WickReport:
    """Largest deviation of correlation functions from Wick factorisation.

    Every word of length ``<= max_length`` (at most 4) over the letters
    ``a_i, a*_i`` is checked: odd words must vanish and four-letter words must
    equal the sum over the three ordered pairings of two-point functions.
    Letter ``p < M`` is ``a_p``, letter ``p >= M`` is ``a*_{p-M}``.
    """
    if not 1 <= max_length <= 4:
        raise ContractError("words up to length 4 are supported")
    ops, adj = _letters(space)
    L = len(ops)
    one = [op @ phi for op in ops]
    two = {(p, q): ops[p] @ one[q] for p in range(L) for q in range(L)}
    pair = np.array([[np.vdot(phi, two[p, q]) for q in range(L)] for p in range(L)])
    odd_max, even_max, worst, worst_word = 0.0, 0.0, 0.0, ()
    for p in range(L):
        v = abs(np.vdot(phi, one[p]))
        if v > worst:
            worst, worst_word = v, (p,)
        odd_max = max(odd_max, v)
    if max_length >= 3:
        for p, q, r in product(range(L), repeat=3):
            v = abs(np.vdot(one[adj[p]], two[q, r]))
            if v > worst:
                worst, worst_word = v, (p, q, r)
            odd_max = max(odd_max, v)
    if max_length >= 4:
        left = np.array([two[adj[q], adj[p]] for p in range(L) for q in range(L)])
        right = np.array([two[r, s] for r in range(L) for s in range(L)])
        direct = (left.conj() @ right.T).reshape(L, L, L, L)
        wick = (
            np.einsum("pq,rs->pqrs", pair, pair)
            + np.einsum("pr,qs->pqrs", pair, pair)
            + np.einsum("ps,qr->pqrs", pair, pair)
        )
        diff = np.abs(direct - wick)
        idx = np.unravel_index(np.argmax(diff), diff.shape)
        even_max = float(diff[idx])
        if even_max > worst:
            worst, worst_word = even_max, tuple(int(i) for i in idx)
    return WickReport(float(worst), float(odd_max), even_max, worst_word)


def moment(phi: np.ndarray, space: FockSpace, ell: int) -> float:
    """``<N^ell>`` by direct summation over occupation totals."""
    return float(np.dot(np.abs(phi) ** 2, space.number_diagonal**ell) / np.vdot(phi, phi).real)


def factorial_moment(phi: np.ndarray, space: FockSpace, ell: int) -> float:
    """``<N (N-1) ... (N-ell+1)>``."""
    n = space.number_diagonal
    f = np.ones_like(n)
    for s in range(ell):
        f = f * (n - s)
    return float(np.dot(np.abs(phi) ** 2, f) / np.vdot(phi, phi).real)


def moment_constant(ell: int) -> int:
    """``C_ell = (2 ell - 1)!! * 2^(ell - 1)``: pairings of ``2 ell`` letters times normal-ordering terms."""
    if ell < 1:
        raise ContractError("ell must be >= 1")
    double_fact = factorial(2 * ell) // (2**ell * factorial(ell))
    return double_fact * 2 ** (ell - 1)


def moment_bound_check(phi: np.ndarray, space: FockSpace, ell: int, *, factorial_form: bool = False) -> bool:
    """Check ``<N^ell> <= C_ell (1 + <N>)^ell`` (or the factorial moment version)."""
    if not 1 <= ell <= 4:
        raise ContractError("ell must be between 1 and 4")
    lhs = factorial_moment(phi, space, ell) if factorial_form else moment(phi, space, ell)
    return lhs <= moment_constant(ell) * (1.0 + moment(phi, space, 1)) ** ell


def number_variance_wick(state: PairState) -> float:
    """``<N^2>`` of a quasi-free state from its pair: ``(tr g)^2 + |a|^2 + tr g + |g|^2``."""
    tr = float(np.trace(state.gamma).real)
    return tr**2 + float(np.linalg.norm(state.alpha) ** 2) + tr + float(np.linalg.norm(state.gamma) ** 2)
