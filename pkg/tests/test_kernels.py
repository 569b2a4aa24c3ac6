import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bogdyn.errors import ContractError
from bogdyn.hartree import hartree_evolve, initial_field
from bogdyn.interaction import sample_w, scale_wN
from bogdyn.kernels import (
    KernelProvider,
    build_h,
    build_K1,
    build_K1_tilde,
    build_K2,
    kernels_at,
    projector_Q,
)
from bogdyn.lattice import GridFunction, build_lattice, kinetic_matrix


def random_u(lat, seed):
    rng = np.random.default_rng(seed)
    c = rng.normal(size=lat.n_sites) + 1j * rng.normal(size=lat.n_sites)
    return GridFunction(lat, c / np.linalg.norm(c))


@pytest.fixture
def lat_w():
    lat = build_lattice(1, 16, 6.0)
    return lat, sample_w("compact_bump", {"amplitude": 1.2, "radius": 1.5}, lat)


def test_projector_of_plane_wave():
    lat = build_lattice(1, 8, 2.0)
    u = initial_field(lat, "plane_wave", mode=[0])
    Q = projector_Q(u)
    np.testing.assert_allclose(Q @ u.coeffs, 0, atol=1e-15)
    np.testing.assert_allclose(Q @ lat.inverse(np.eye(8)[1]), lat.inverse(np.eye(8)[1]), atol=1e-15)
    assert np.linalg.matrix_rank(Q) == 7


def test_projector_requires_normalised_input():
    lat = build_lattice(1, 8, 2.0)
    u = GridFunction(lat, 2 * np.ones(8))
    with pytest.raises(ContractError):
        projector_Q(u)
    Q = projector_Q(u, normalize=True)
    np.testing.assert_allclose(Q @ Q, Q, atol=1e-14)


def test_zero_interaction(lat_w):
    lat, _ = lat_w
    zero = sample_w("compact_bump", {"amplitude": 0.0, "radius": 1.0}, lat)
    u = random_u(lat, 1)
    assert not np.any(build_K1(u, zero)) and not np.any(build_K2(u, zero))
    h, h1, h2 = build_h(u, zero)
    np.testing.assert_allclose(h, kinetic_matrix(lat), atol=1e-14)
    np.testing.assert_allclose(h1, kinetic_matrix(lat) + np.eye(16), atol=1e-14)
    np.testing.assert_allclose(h2, -np.eye(16), atol=1e-14)


def test_constant_profile_exchange_spectrum(lat_w):
    lat, w = lat_w
    u = initial_field(lat, "constant")
    K1t = build_K1_tilde(u, w)
    # circulant: eigenvalues are the Fourier coefficients of w over the volume
    w_hat = np.fft.fft(w.values).real * lat.cell_volume
    np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(K1t)), np.sort(w_hat / lat.volume), atol=1e-13)


def test_constant_profile_generator(lat_w):
    lat, w = lat_w
    u = initial_field(lat, "constant")
    h, _, _ = build_h(u, w)
    expected = w.integral() / (2 * lat.volume) * np.eye(16) + build_K1(u, w)
    np.testing.assert_allclose(h - kinetic_matrix(lat), expected, atol=1e-13)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**31))
def test_symmetry_and_projector_consistency(seed):
    lat = build_lattice(1, 8, 4.0)
    w = sample_w("compact_bump", {"amplitude": 1.0, "radius": 1.7}, lat)
    u = random_u(lat, seed)
    Q = projector_Q(u)
    K1, K2 = build_K1(u, w), build_K2(u, w)
    assert np.max(np.abs(K2 - K2.T)) == 0
    np.testing.assert_allclose(K1, K1.conj().T, atol=1e-14)
    np.testing.assert_allclose(Q @ K1 @ Q, K1, atol=1e-12)
    np.testing.assert_allclose(Q @ K2 @ Q.conj(), K2, atol=1e-12)
    h, h1, h2 = build_h(u, w)
    np.testing.assert_allclose(h, h1 + h2, atol=1e-13)
    np.testing.assert_allclose(h, h.conj().T, atol=1e-13)


def test_h2_triangle_bound(lat_w):
    lat, w = lat_w
    for seed in range(5):
        u = random_u(lat, seed)
        k = kernels_at(u.coeffs, w)
        sup = np.max(np.abs(u.values)) ** 2
        bound = w.integral() * sup + k.mu + 1 + np.linalg.norm(k.K1, 2)
        assert np.linalg.norm(k.h2, 2) <= bound


def test_derivative_of_k2_tilde_matches_finite_difference(lat_w):
    lat, w = lat_w
    u0 = initial_field(lat, "gaussian_packet", width=1.0, mode=[1])
    traj = hartree_evolve(u0, w, 0.02, 1e-4, 1)
    prov = KernelProvider(traj, w, with_derivative=True)
    fd = (prov(0.0101).K2_tilde - prov(0.0099).K2_tilde) / 2e-4
    np.testing.assert_allclose(prov(0.01).dK2_tilde, fd, atol=1e-6)


def test_provider_interpolates_and_caches(lat_w):
    lat, w = lat_w
    u0 = initial_field(lat, "gaussian_packet", width=1.0)
    traj = hartree_evolve(u0, w, 0.1, 0.01, 1)
    prov = KernelProvider(traj, w)
    assert prov(0.05) is prov(0.05)
    k = prov(0.055)
    assert abs(np.linalg.norm(k.coeffs) - 1) < 1e-14
    with pytest.raises(ContractError):
        prov(0.2)


def test_norm_scaling_across_n_sweep():
    lat = build_lattice(1, 64, 8.0)
    w = sample_w("compact_bump", {"amplitude": 1.0, "radius": 1.0}, lat)
    u0 = initial_field(lat, "gaussian_packet", width=1.5, mode=[1])
    beta = 0.25
    hs, op = [], []
    for N in (8, 16, 32, 64):
        wN = scale_wN(w, N, beta)
        traj = hartree_evolve(u0, wN, 1.0, 5e-4, 200)
        hs.append(np.linalg.norm(build_K2(traj.sample(0), wN)) ** 2 / N**beta)
        op.append(max(np.linalg.norm(build_K2(traj.sample(i), wN), 2) for i in range(len(traj))))
    assert max(hs) / min(hs) < 1.5
    assert (max(op) - min(op)) / max(op) <= 0.2
