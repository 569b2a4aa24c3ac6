"""Periodic lattices, weighted grid functions and spectral operators.

Grid functions store ``coeffs = f(x) * spacing**(dim/2)`` so that the plain
Euclidean inner product of coefficient vectors is the L2 inner product. All
transforms use the unitary DFT, which makes the Laplacian the Fourier
multiplier ``|k|^2`` with no extra normalisation.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ConfigurationError, ContractError


def _is_power_of_two(n: int) -> bool:
    return n >= 2 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Lattice:
    """Periodic cubic lattice of ``points_per_dim**dim`` sites.

    Sites are indexed in C order over ``shape``; site ``j`` of an axis sits at
    ``j * spacing`` so index 0 is the origin.
    """

    dim: int
    points_per_dim: int
    box_length: float

    @property
    def spacing(self) -> float:
        return self.box_length / self.points_per_dim

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points_per_dim,) * self.dim

    @property
    def n_sites(self) -> int:
        return self.points_per_dim**self.dim

    @property
    def volume(self) -> float:
        return self.box_length**self.dim

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dim

    @cached_property
    def wavenumbers(self) -> tuple[np.ndarray, ...]:
        k = 2.0 * np.pi * np.fft.fftfreq(self.points_per_dim, d=self.spacing)
        return (k,) * self.dim

    @cached_property
    def k_squared(self) -> np.ndarray:
        """Flattened ``|k|^2`` for every Fourier mode, in transform order."""
        grids = np.meshgrid(*self.wavenumbers, indexing="ij")
        out = sum(g**2 for g in grids).ravel()
        out.setflags(write=False)
        return out

    @cached_property
    def coordinates(self) -> np.ndarray:
        """Site positions, shape ``(n_sites, dim)``."""
        axis = np.arange(self.points_per_dim) * self.spacing
        grids = np.meshgrid(*([axis] * self.dim), indexing="ij")
        out = np.stack([g.ravel() for g in grids], axis=1)
        out.setflags(write=False)
        return out

    @cached_property
    def radius_from_origin(self) -> np.ndarray:
        """Minimum-image distance of each site to the origin."""
        j = np.arange(self.points_per_dim)
        d_axis = np.minimum(j, self.points_per_dim - j) * self.spacing
        grids = np.meshgrid(*([d_axis] * self.dim), indexing="ij")
        out = np.sqrt(sum(g**2 for g in grids)).ravel()
        out.setflags(write=False)
        return out

    @cached_property
    def site_index(self) -> np.ndarray:
        """Integer multi-index of every site, shape ``(n_sites, dim)``."""
        out = np.stack(np.unravel_index(np.arange(self.n_sites), self.shape), axis=1)
        out.setflags(write=False)
        return out

    def forward(self, coeffs: np.ndarray) -> np.ndarray:
        """Unitary DFT of a flattened coefficient vector."""
        return np.fft.fftn(np.reshape(coeffs, self.shape), norm="ortho").ravel()

    def inverse(self, coeffs_hat: np.ndarray) -> np.ndarray:
        return np.fft.ifftn(np.reshape(coeffs_hat, self.shape), norm="ortho").ravel()

    @cached_property
    def dft_matrix(self) -> np.ndarray:
        """Dense unitary matrix ``F`` with ``forward(c) == F @ c``."""
        out = np.stack([self.forward(e) for e in np.eye(self.n_sites)], axis=1)
        out.setflags(write=False)
        return out

    @cached_property
    def kinetic(self) -> np.ndarray:
        F = self.dft_matrix
        out = (F.conj().T * self.k_squared) @ F
        out = 0.5 * (out + out.conj().T)
        out.setflags(write=False)
        return out


def build_lattice(dim: int, points_per_dim: int, box_length: float, *, strict: bool = True) -> Lattice:
    """Validate parameters and build a :class:`Lattice`.

    Args:
        dim: Spatial dimension, 1 to 3.
        points_per_dim: Sites per axis. Must be a power of two unless
            ``strict`` is False, in which case any value >= 2 is accepted
            (tiny oracle lattices such as 3 sites need this).
        box_length: Side length of the periodic box.
        strict: Enforce the power-of-two rule.

    Raises:
        ConfigurationError: On any invalid parameter.
    """
    if isinstance(dim, bool) or int(dim) != dim or dim not in (1, 2, 3):
        raise ConfigurationError(f"dim must be 1, 2 or 3, got {dim!r}", "lattice.dim")
    if isinstance(points_per_dim, bool) or int(points_per_dim) != points_per_dim or points_per_dim < 2:
        raise ConfigurationError(f"points_per_dim must be an integer >= 2, got {points_per_dim!r}", "lattice.points_per_dim")
    if strict and not _is_power_of_two(int(points_per_dim)):
        raise ConfigurationError(f"points_per_dim must be a power of two, got {points_per_dim}", "lattice.points_per_dim")
    if not np.isfinite(box_length) or box_length <= 0:
        raise ConfigurationError(f"box_length must be positive, got {box_length!r}", "lattice.box_length")
    return Lattice(int(dim), int(points_per_dim), float(box_length))


@dataclass(frozen=True, eq=False)
class GridFunction:
    """A complex function on a lattice, stored as weighted coefficients."""

    lattice: Lattice
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex).ravel()
        if c.size != self.lattice.n_sites:
            raise ContractError(f"expected {self.lattice.n_sites} coefficients, got {c.size}")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_values(cls, lattice: Lattice, values) -> "GridFunction":
        """Build from pointwise values ``f(x)`` at the sites."""
        v = np.asarray(values, dtype=complex).ravel()
        return cls(lattice, v * lattice.spacing ** (lattice.dim / 2))

    @property
    def values(self) -> np.ndarray:
        return self.coeffs / self.lattice.spacing ** (self.lattice.dim / 2)

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def with_coeffs(self, coeffs) -> "GridFunction":
        return GridFunction(self.lattice, coeffs)


def _check_same(f: GridFunction, g: GridFunction):
    if f.lattice != g.lattice:
        raise ContractError("grid functions live on different lattices")


def laplacian_apply(f: GridFunction) -> GridFunction:
    """Return ``-Delta f`` computed as the Fourier multiplier ``|k|^2``."""
    lat = f.lattice
    return f.with_coeffs(lat.inverse(lat.k_squared * lat.forward(f.coeffs)))


def inner_product(f: GridFunction, g: GridFunction) -> complex:
    """L2 inner product, antilinear in the first argument."""
    _check_same(f, g)
    return complex(np.vdot(f.coeffs, g.coeffs))


def circular_convolve(kernel_values: np.ndarray, data: np.ndarray, lattice: Lattice) -> np.ndarray:
    """Periodic convolution ``sum_n kernel(x_m - x_n) data_n`` of flattened arrays."""
    kh = np.fft.fftn(np.reshape(kernel_values, lattice.shape))
    dh = np.fft.fftn(np.reshape(data, lattice.shape))
    out = np.fft.ifftn(kh * dh).ravel()
    if np.isrealobj(kernel_values) and np.isrealobj(data):
        return out.real
    return out


def convolve(kernel_values, f: GridFunction) -> GridFunction:
    """Periodic convolution ``(kernel * f)(x) = sum_y kernel(x - y) f(y) spacing^dim``.

    Args:
        kernel_values: Real pointwise kernel values on the sites of ``f.lattice``
            (index 0 is the origin).
        f: Function to convolve.
    """
    lat = f.lattice
    k = np.asarray(kernel_values, dtype=float).ravel()
    if k.size != lat.n_sites:
        raise ContractError("kernel size does not match the lattice")
    # Coefficients already carry spacing^(d/2); one more cell volume gives the quadrature.
    return f.with_coeffs(lat.cell_volume * circular_convolve(k, f.coeffs, lat))


def sobolev_norm(f: GridFunction, s: float) -> float:
    """``H^s`` norm with Fourier weight ``(1 + |k|^2)^(s/2)``."""
    lat = f.lattice
    fh = lat.forward(f.coeffs)
    return float(np.linalg.norm((1.0 + lat.k_squared) ** (s / 2) * fh))


def kinetic_matrix(lattice: Lattice) -> np.ndarray:
    """Dense Hermitian matrix of ``-Delta`` in the weighted site basis (read-only)."""
    return lattice.kinetic
