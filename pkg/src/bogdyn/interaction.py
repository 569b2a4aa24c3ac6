"""Two-body potentials, their mean-field rescaling and the Hartree potential."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .errors import ConfigurationError, ResolutionWarning
from .lattice import GridFunction, Lattice, circular_convolve

SHAPES = ("compact_bump", "gaussian_truncated", "custom_table")

# Scaled supports narrower than this many lattice spacings get flagged.
MIN_SUPPORT_SPACINGS = 4.0


@dataclass(frozen=True, eq=False)
class PotentialGrid:
    """A radial potential sampled at minimum-image distances from the origin.

    Attributes:
        lattice: Lattice the values live on.
        values: Pointwise values, index 0 is ``w(0)``.
        shape_tag: One of :data:`SHAPES`.
        params: Shape parameters as passed to :func:`sample_w`.
        profile: Radial profile ``r -> w(r)`` of the unscaled potential.
        support_radius: Radius beyond which the scaled potential vanishes.
        N, beta: Mean-field scaling applied to ``profile``.
        attractive: Whether the sign was flipped.
        under_resolved: Set when the scaled support spans fewer than
            ``MIN_SUPPORT_SPACINGS`` lattice spacings.
    """

    lattice: Lattice
    values: np.ndarray
    shape_tag: str
    params: dict
    profile: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    support_radius: float
    N: int = 1
    beta: float = 0.0
    attractive: bool = False
    under_resolved: bool = False

    def integral(self) -> float:
        """Lattice quadrature of the potential over the box."""
        return float(np.sum(self.values) * self.lattice.cell_volume)

    def is_zero(self) -> bool:
        return not np.any(self.values)


def _param(params: dict, name: str, shape: str) -> float:
    if name not in params:
        raise ConfigurationError(f"missing parameter {name!r} for shape {shape}", f"interaction.params.{name}")
    value = params[name]
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ConfigurationError(f"{name} must be a number, got {value!r}", f"interaction.params.{name}") from None
    if not np.isfinite(value):
        raise ConfigurationError(f"{name} must be finite", f"interaction.params.{name}")
    return value


def _compact_bump(params, half_box):
    A = _param(params, "amplitude", "compact_bump")
    r0 = _param(params, "radius", "compact_bump")
    if A < 0:
        raise ConfigurationError("amplitude must be non-negative", "interaction.params.amplitude")
    if not 0 < r0 < half_box:
        raise ConfigurationError(f"radius must lie in (0, {half_box:g}) so the support does not wrap", "interaction.params.radius")

    def profile(r):
        s = np.clip(1.0 - (np.asarray(r) / r0) ** 2, 0.0, None)
        return A * s * s

    return profile, r0


def _gaussian_truncated(params, half_box):
    A = _param(params, "amplitude", "gaussian_truncated")
    width = _param(params, "width", "gaussian_truncated")
    rc = _param(params, "cutoff", "gaussian_truncated")
    if A < 0:
        raise ConfigurationError("amplitude must be non-negative", "interaction.params.amplitude")
    if width <= 0:
        raise ConfigurationError("width must be positive", "interaction.params.width")
    if not 0 < rc < half_box:
        raise ConfigurationError(f"cutoff must lie in (0, {half_box:g}) so the support does not wrap", "interaction.params.cutoff")
    sc = rc * rc
    g = lambda s: np.exp(-s / (2 * width**2))
    slope = -g(sc) / (2 * width**2)

    # Subtracting the tangent in r^2 at the cutoff keeps the profile C^1 and decreasing.
    def shaped(s):
        return np.where(s < sc, g(s) - g(sc) - slope * (s - sc), 0.0)

    norm = shaped(np.float64(0.0))

    def profile(r):
        return A * shaped(np.asarray(r, dtype=float) ** 2) / norm

    return profile, rc


def _custom_table(params, half_box):
    if "radii" not in params or "values" not in params:
        raise ConfigurationError("custom_table needs 'radii' and 'values'", "interaction.params")
    radii = np.asarray(params["radii"], dtype=float)
    vals = np.asarray(params["values"], dtype=float)
    if radii.ndim != 1 or radii.shape != vals.shape or radii.size < 2:
        raise ConfigurationError("radii and values must be equal-length lists (>= 2 entries)", "interaction.params.radii")
    if np.any(np.diff(radii) <= 0) or radii[0] < 0:
        raise ConfigurationError("radii must be non-negative and strictly increasing", "interaction.params.radii")
    if np.any(vals < 0) or np.any(np.diff(vals) > 0):
        raise ConfigurationError("values must be non-negative and non-increasing", "interaction.params.values")
    support = radii[-1] if vals[-1] == 0 else np.inf
    if not support < half_box:
        raise ConfigurationError("table must reach zero before half the box length", "interaction.params.values")

    def profile(r):
        return np.interp(np.asarray(r, dtype=float), radii, vals, right=0.0)

    return profile, float(support)


_BUILDERS = {
    "compact_bump": _compact_bump,
    "gaussian_truncated": _gaussian_truncated,
    "custom_table": _custom_table,
}


def sample_w(shape_tag: str, params: dict, lattice: Lattice, attractive: bool = False) -> PotentialGrid:
    """Sample a radial, non-negative, non-increasing potential on the lattice.

    Args:
        shape_tag: ``compact_bump`` (params ``amplitude``, ``radius``), giving
            ``A (1 - r^2/r0^2)^2``; ``gaussian_truncated`` (``amplitude``,
            ``width``, ``cutoff``); or ``custom_table`` (``radii``, ``values``,
            linearly interpolated).
        params: Shape parameters.
        lattice: Target lattice.
        attractive: Flip the sign of the potential.

    Raises:
        ConfigurationError: Unknown shape, bad parameters, or a support that
            would wrap around the periodic box.
    """
    if shape_tag not in _BUILDERS:
        raise ConfigurationError(f"unknown shape {shape_tag!r}, expected one of {SHAPES}", "interaction.shape")
    profile, support = _BUILDERS[shape_tag](dict(params), lattice.box_length / 2)
    sign = -1.0 if attractive else 1.0
    values = sign * profile(lattice.radius_from_origin)
    values.setflags(write=False)
    return PotentialGrid(lattice, values, shape_tag, dict(params), profile, support, attractive=bool(attractive))


def validate_scaling(N, beta, dim: int):
    if isinstance(N, bool) or int(N) != N or N < 1:
        raise ConfigurationError(f"N must be a positive integer, got {N!r}", "scaling.N")
    if not np.isfinite(beta) or not 0 <= beta < 1.0 / dim:
        raise ConfigurationError(f"beta must lie in [0, 1/{dim}), got {beta!r}", "scaling.beta")


def scale_wN(w: PotentialGrid, N: int, beta: float) -> PotentialGrid:
    """Return ``w_N(x) = N^(d beta) w(N^beta x)`` resampled on the lattice.

    Emits :class:`ResolutionWarning` (and sets ``under_resolved``) when the
    scaled support covers fewer than four lattice spacings.
    """
    lat = w.lattice
    validate_scaling(N, beta, lat.dim)
    if w.N != 1 or w.beta != 0:
        raise ConfigurationError("scale_wN expects an unscaled potential", "scaling")
    lam = float(N) ** beta
    sign = -1.0 if w.attractive else 1.0
    values = sign * lam**lat.dim * w.profile(lam * lat.radius_from_origin)
    values.setflags(write=False)
    support = w.support_radius / lam
    under = bool(2 * support < MIN_SUPPORT_SPACINGS * lat.spacing)
    if under:
        warnings.warn(
            f"scaled interaction support {2 * support:.3g} spans fewer than "
            f"{MIN_SUPPORT_SPACINGS:g} lattice spacings ({lat.spacing:.3g})",
            ResolutionWarning,
            stacklevel=2,
        )
    return replace(w, values=values, support_radius=support, N=int(N), beta=float(beta), under_resolved=under)


def mean_field_values(wN: PotentialGrid, coeffs: np.ndarray) -> np.ndarray:
    """Pointwise ``(w_N * |u|^2)(x)`` from weighted coefficients."""
    # |coeffs|^2 = |u|^2 spacing^d, which is exactly the quadrature weight.
    return circular_convolve(wN.values, np.abs(coeffs) ** 2, wN.lattice)


def mean_field_potential(wN: PotentialGrid, u: GridFunction) -> np.ndarray:
    """Real pointwise values of ``w_N * |u|^2`` on the sites."""
    return mean_field_values(wN, u.coeffs)


def mu_from_coeffs(wN: PotentialGrid, coeffs: np.ndarray) -> float:
    return 0.5 * float(np.dot(np.abs(coeffs) ** 2, mean_field_values(wN, coeffs)))


def mu_N(wN: PotentialGrid, u: GridFunction) -> float:
    """Gauge phase ``(1/2) integral |u|^2 (w_N * |u|^2)``."""
    return mu_from_coeffs(wN, u.coeffs)


def interaction_matrix(wN: PotentialGrid) -> np.ndarray:
    """Dense real matrix ``W[m, n] = w_N(x_m - x_n)`` with minimum-image differences."""
    lat = wN.lattice
    idx = lat.site_index
    diff = (idx[:, None, :] - idx[None, :, :]) % lat.points_per_dim
    flat = np.ravel_multi_index(tuple(np.moveaxis(diff, -1, 0)), lat.shape)
    return np.asarray(wN.values)[flat]
