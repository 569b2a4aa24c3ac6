import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bogdyn.errors import ConfigurationError, ContractError
from bogdyn.lattice import (
    GridFunction,
    build_lattice,
    convolve,
    inner_product,
    kinetic_matrix,
    laplacian_apply,
    sobolev_norm,
)


def random_function(lat, seed):
    rng = np.random.default_rng(seed)
    return GridFunction(lat, rng.normal(size=lat.n_sites) + 1j * rng.normal(size=lat.n_sites))


def plane_wave(lat, mode):
    x = lat.coordinates
    k = 2 * np.pi * np.asarray(mode) / lat.box_length
    return GridFunction.from_values(lat, np.exp(1j * x @ k) / np.sqrt(lat.volume)), float(k @ k)


def test_build_lattice_examples():
    lat = build_lattice(1, 8, 4.0)
    assert lat.spacing == 0.5 and lat.n_sites == 8
    lat = build_lattice(2, 4, 2.0)
    assert lat.n_sites == 16 and lat.spacing == 0.5
    assert lat.spacing * lat.points_per_dim == lat.box_length


@pytest.mark.parametrize("args", [(1, 3, 1.0), (4, 8, 1.0), (0, 8, 1.0), (1, 8, 0.0), (1, 8, -2.0), (1, 1, 1.0)])
def test_build_lattice_rejects(args):
    with pytest.raises(ConfigurationError):
        build_lattice(*args)


def test_non_power_of_two_opt_in():
    lat = build_lattice(1, 3, 3.0, strict=False)
    assert lat.n_sites == 3 and lat.spacing == 1.0


def test_wavenumbers_symmetric_up_to_nyquist():
    lat = build_lattice(1, 8, 2 * np.pi)
    k = np.sort(lat.wavenumbers[0])
    np.testing.assert_allclose(k, np.arange(-4, 4))


def test_laplacian_constant_and_plane_wave():
    lat = build_lattice(1, 16, 3.0)
    const = GridFunction.from_values(lat, np.full(16, 2.5))
    np.testing.assert_allclose(laplacian_apply(const).coeffs, 0, atol=1e-12)
    f, k2 = plane_wave(lat, [3])
    np.testing.assert_allclose(laplacian_apply(f).coeffs, k2 * f.coeffs, atol=1e-12)


def test_plane_wave_2d_eigenfunction():
    lat = build_lattice(2, 8, 2.0)
    f, k2 = plane_wave(lat, [1, -2])
    np.testing.assert_allclose(laplacian_apply(f).coeffs, k2 * f.coeffs, atol=1e-10)


def test_plane_waves_orthonormal():
    lat = build_lattice(1, 16, 5.0)
    f, _ = plane_wave(lat, [1])
    g, _ = plane_wave(lat, [2])
    assert abs(inner_product(f, f) - 1) < 1e-12
    assert abs(inner_product(f, g)) < 1e-12


@settings(max_examples=30, deadline=None)
@given(dim=st.integers(1, 3), exp=st.integers(1, 3), seed=st.integers(0, 2**31))
def test_parseval_and_self_adjointness(dim, exp, seed):
    lat = build_lattice(dim, 2**exp, 1.7)
    f, g = random_function(lat, seed), random_function(lat, seed + 1)
    assert abs(np.linalg.norm(lat.forward(f.coeffs)) ** 2 / f.norm() ** 2 - 1) < 1e-12
    lhs = inner_product(f, laplacian_apply(g))
    rhs = inner_product(laplacian_apply(f), g)
    scale = f.norm() * g.norm() * lat.k_squared.max()
    assert abs(lhs - rhs) <= 1e-12 * scale
    assert inner_product(f, f).imag == 0 and inner_product(f, f).real >= 0


def test_from_values_weighting():
    lat = build_lattice(1, 8, 4.0)
    f = GridFunction.from_values(lat, np.ones(8))
    # ||1||^2 = box volume
    assert abs(f.norm() ** 2 - 4.0) < 1e-12
    np.testing.assert_allclose(f.values, 1.0)


def test_convolve_delta_and_constant():
    lat = build_lattice(2, 4, 2.0)
    f = random_function(lat, 3)
    delta = np.zeros(lat.n_sites)
    delta[0] = 1 / lat.cell_volume
    np.testing.assert_allclose(convolve(delta, f).coeffs, f.coeffs, atol=1e-12)
    kernel = np.random.default_rng(0).uniform(size=lat.n_sites)
    c = GridFunction.from_values(lat, np.full(lat.n_sites, 0.7 - 0.2j))
    expected = (0.7 - 0.2j) * kernel.sum() * lat.cell_volume
    np.testing.assert_allclose(convolve(kernel, c).values, expected, atol=1e-12)


def test_convolve_linear_and_self_adjoint_for_even_kernels():
    lat = build_lattice(1, 16, 4.0)
    r = lat.radius_from_origin
    kernel = np.exp(-(r**2))
    f, g = random_function(lat, 1), random_function(lat, 2)
    np.testing.assert_allclose(
        convolve(kernel, GridFunction(lat, 2 * f.coeffs - 3j * g.coeffs)).coeffs,
        2 * convolve(kernel, f).coeffs - 3j * convolve(kernel, g).coeffs,
        atol=1e-12,
    )
    assert abs(inner_product(f, convolve(kernel, g)) - inner_product(convolve(kernel, f), g)) < 1e-12


def test_convolve_size_mismatch():
    lat = build_lattice(1, 8, 1.0)
    with pytest.raises(ContractError):
        convolve(np.ones(4), random_function(lat, 0))


def test_sobolev_examples():
    lat = build_lattice(1, 16, 6.0)
    c = GridFunction.from_values(lat, np.full(16, 1.5))
    for s in (0.0, 1.0, 2.5):
        assert abs(sobolev_norm(c, s) - 1.5 * np.sqrt(6.0)) < 1e-12
    f, k2 = plane_wave(lat, [2])
    assert abs(sobolev_norm(f, 2) - (1 + k2)) < 1e-12
    g = random_function(lat, 5)
    assert sobolev_norm(g, 2) >= g.norm()


def test_kinetic_matrix_matches_fourier_multiplier():
    lat = build_lattice(2, 4, 3.0)
    T = kinetic_matrix(lat)
    f = random_function(lat, 9)
    np.testing.assert_allclose(T @ f.coeffs, laplacian_apply(f).coeffs, atol=1e-12)
    np.testing.assert_allclose(T, T.conj().T, atol=1e-13)
