import numpy as np
import pytest
from scipy.integrate import cumulative_trapezoid

from bogdyn.errors import ConfigurationError, NumericalBlowupError
from bogdyn.hartree import (
    HartreeState,
    free_evolution,
    hartree_energy,
    hartree_evolve,
    hartree_step,
    initial_field,
)
from bogdyn.interaction import sample_w, scale_wN
from bogdyn.lattice import GridFunction, build_lattice, sobolev_norm


@pytest.fixture
def setup():
    lat = build_lattice(1, 16, 8.0)
    w = sample_w("compact_bump", {"amplitude": 1.0, "radius": 1.0}, lat)
    u0 = initial_field(lat, "gaussian_packet", width=1.5, mode=[1])
    return lat, w, u0


def zero_w(lat):
    return sample_w("compact_bump", {"amplitude": 0.0, "radius": 1.0}, lat)


def test_energy_examples():
    lat = build_lattice(1, 32, 6.0)
    w = sample_w("compact_bump", {"amplitude": 2.0, "radius": 1.5}, lat)
    const = initial_field(lat, "constant")
    assert hartree_energy(const, w) == pytest.approx(w.integral() / (2 * lat.volume), abs=1e-14)
    pw = initial_field(lat, "plane_wave", mode=[3])
    assert hartree_energy(pw, zero_w(lat)) == pytest.approx((2 * np.pi * 3 / 6.0) ** 2, rel=1e-13)


def test_free_plane_wave_step_is_exact():
    lat = build_lattice(1, 16, 5.0)
    pw = initial_field(lat, "plane_wave", mode=[2])
    k2 = (2 * np.pi * 2 / 5.0) ** 2
    state = hartree_step(HartreeState.initial(pw, zero_w(lat)), zero_w(lat), 0.01)
    np.testing.assert_allclose(state.u.coeffs, np.exp(-1j * k2 * 0.01) * pw.coeffs, atol=1e-15)
    assert state.t == 0.01


def test_constant_profile_rotates_with_closed_form_phase():
    lat = build_lattice(2, 8, 4.0)
    w = sample_w("compact_bump", {"amplitude": 1.5, "radius": 1.0}, lat)
    const = initial_field(lat, "constant")
    omega = w.integral() / (2 * lat.volume)
    state = HartreeState.initial(const, w)
    for _ in range(10):
        state = hartree_step(state, w, 0.05)
    np.testing.assert_allclose(state.u.coeffs, np.exp(-1j * omega * 0.5) * const.coeffs, atol=1e-13)
    traj = hartree_evolve(const, w, 1.0, 0.01, 10)
    assert np.max(np.abs(np.abs(traj.fields) ** 2 - np.abs(const.coeffs) ** 2)) <= 1e-12


def test_zero_interaction_matches_free_evolution():
    lat = build_lattice(1, 32, 8.0)
    u0 = initial_field(lat, "gaussian_packet", width=1.0, mode=[2])
    traj = hartree_evolve(u0, zero_w(lat), 1.0, 0.01, 10)
    for t, f in traj.samples:
        assert np.max(np.abs(f.coeffs - free_evolution(u0, t).coeffs)) <= 1e-12


def test_conservation_and_second_order(setup):
    lat, w, u0 = setup
    drifts = []
    for dt in (1e-3, 5e-4):
        traj = hartree_evolve(u0, w, 2.0, dt, 20)
        assert traj.max_mass_drift() <= 1e-12
        drifts.append(traj.max_relative_energy_drift())
    assert drifts[1] <= 1e-8
    assert 3.5 <= drifts[0] / drifts[1] <= 4.5


def test_gauge_covariance(setup):
    lat, w, u0 = setup
    with_mu = hartree_evolve(u0, w, 1.0, 1e-3, 1)
    without = hartree_evolve(u0, w, 1.0, 1e-3, 1, include_mu=False)
    phase = np.exp(1j * cumulative_trapezoid(with_mu.mu, with_mu.times, initial=0.0))
    diff = np.abs(with_mu.fields - phase[:, None] * without.fields)
    assert diff.max() <= 1e-10


def test_h2_norm_stays_bounded(setup):
    lat, w, u0 = setup
    traj = hartree_evolve(u0, w, 2.0, 5e-4, 100)
    h2 = traj.sobolev_series(2)
    assert h2.max() <= 10 * sobolev_norm(u0, 2)


def test_backward_step_inverts_forward(setup):
    lat, w, u0 = setup
    s = HartreeState.initial(u0, w)
    back = hartree_step(hartree_step(s, w, 0.01), w, -0.01)
    # Strang splitting is time-symmetric up to the density-dependent half kicks.
    assert np.max(np.abs(back.u.coeffs - u0.coeffs)) < 1e-6


def test_blowup_reports_time(setup):
    lat, w, u0 = setup
    bad = u0.with_coeffs(np.where(np.arange(16) == 3, np.nan, u0.coeffs))
    with pytest.raises(NumericalBlowupError) as exc:
        hartree_step(HartreeState(bad, 0.25, 0.0, 1.0, 0.0), w, 0.01)
    assert exc.value.time == pytest.approx(0.26)


def test_time_grid_validation(setup):
    lat, w, u0 = setup
    with pytest.raises(ConfigurationError):
        hartree_evolve(u0, w, 1.0, 0.3)
    with pytest.raises(ConfigurationError):
        hartree_evolve(u0, w, 1.0, -0.1)


def test_trajectory_interpolation(setup):
    lat, w, u0 = setup
    traj = hartree_evolve(u0, w, 0.1, 1e-3, 10)
    np.testing.assert_array_equal(traj.coeffs_at(0.05), traj.fields[5])
    mid = traj.coeffs_at(0.055)
    assert abs(np.linalg.norm(mid) - 1) < 1e-14
    raw = traj.coeffs_at(0.055, normalize=False)
    np.testing.assert_allclose(raw, 0.5 * (traj.fields[5] + traj.fields[6]))


def test_scaled_potential_run_conserves_mass():
    lat = build_lattice(1, 64, 8.0)
    w = scale_wN(sample_w("compact_bump", {"amplitude": 1.0, "radius": 2.0}, lat), 64, 0.25)
    u0 = initial_field(lat, "gaussian_packet", width=1.5, mode=[1])
    traj = hartree_evolve(u0, w, 0.5, 5e-4, 50)
    assert traj.max_mass_drift() <= 1e-12
    assert np.all(traj.sup_norm_series() > 0)


def test_initial_field_validation():
    lat = build_lattice(1, 8, 4.0)
    with pytest.raises(ConfigurationError, match="initial.u0.kind"):
        initial_field(lat, "soliton")
    with pytest.raises(ConfigurationError, match="initial.u0.width"):
        initial_field(lat, "gaussian_packet", width=-1)
    f = initial_field(lat, "gaussian_packet", width=0.8, center=[1.0])
    assert abs(f.norm() - 1) < 1e-14
    assert np.argmax(np.abs(f.values)) == 2
