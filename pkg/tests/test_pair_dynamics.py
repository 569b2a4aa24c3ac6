import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import block_diag

from bogdyn.config import validate
from bogdyn.errors import NumericalBlowupError
from bogdyn.pair_dynamics import (
    PairState,
    min_eig_block,
    pair_evolve,
    pair_rhs,
    pair_step,
    particle_expectation,
    quasi_free_defect,
    squeezed_pair,
    squeezing_functions,
)
from bogdyn.scenarios import build_scenario, run_pair

SINH2_ONE = 1.3810978455418155  # sinh(1)^2


def random_hermitian(rng, n):
    X = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return 0.5 * (X + X.conj().T)


def random_symmetric(rng, n):
    X = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return 0.5 * (X + X.T)


def constant(h, K):
    return lambda t: (h, K)


def test_rhs_without_pairing_is_conjugation_flow():
    rng = np.random.default_rng(0)
    h, G, A = random_hermitian(rng, 4), random_hermitian(rng, 4), random_symmetric(rng, 4)
    dG, dA = pair_rhs(PairState(G, A), h, np.zeros((4, 4)))
    np.testing.assert_allclose(dG, -1j * (h @ G - G @ h), atol=1e-13)
    np.testing.assert_allclose(dA, -1j * (h @ A + A @ h.T), atol=1e-13)


def test_rhs_from_vacuum_creates_pairing_only():
    rng = np.random.default_rng(1)
    h, K = random_hermitian(rng, 3), random_symmetric(rng, 3)
    dG, dA = pair_rhs(PairState.vacuum(3), h, K)
    assert not np.any(dG)
    np.testing.assert_allclose(dA, -1j * K)


def test_rhs_additive_over_uncoupled_blocks():
    rng = np.random.default_rng(2)
    parts = [(random_hermitian(rng, n), random_symmetric(rng, n), random_hermitian(rng, n), random_symmetric(rng, n)) for n in (2, 3)]
    h = block_diag(*[p[0] for p in parts])
    K = block_diag(*[p[1] for p in parts])
    G = block_diag(*[p[2] for p in parts])
    A = block_diag(*[p[3] for p in parts])
    dG, dA = pair_rhs(PairState(G, A), h, K)
    sub = [pair_rhs(PairState(p[2], p[3]), p[0], p[1]) for p in parts]
    np.testing.assert_allclose(dG, block_diag(*[s[0] for s in sub]), atol=1e-13)
    np.testing.assert_allclose(dA, block_diag(*[s[1] for s in sub]), atol=1e-13)


def test_rhs_preserves_structure():
    rng = np.random.default_rng(3)
    dG, dA = pair_rhs(PairState(random_hermitian(rng, 5), random_symmetric(rng, 5)), random_hermitian(rng, 5), random_symmetric(rng, 5))
    np.testing.assert_allclose(dG, dG.conj().T, atol=1e-13)
    np.testing.assert_allclose(dA, dA.T, atol=1e-13)


def test_single_mode_closed_form():
    kappa = 0.7
    traj = pair_evolve(PairState.vacuum(1), constant(np.zeros((1, 1)), np.array([[kappa]])), 1.0, 1e-3, 10)
    t = traj.times
    g = np.array([s.gamma[0, 0] for s in traj.states])
    a = np.array([s.alpha[0, 0] for s in traj.states])
    assert np.max(np.abs(g - np.sinh(kappa * t) ** 2)) <= 1e-8
    assert np.max(np.abs(a + 0.5j * np.sinh(2 * kappa * t))) <= 1e-8


def test_quasi_free_defect_examples():
    assert quasi_free_defect(PairState.vacuum(3)) == (0.0, 0.0)
    r = 0.8
    sq = PairState(np.array([[np.sinh(r) ** 2]]), np.array([[np.sinh(r) * np.cosh(r) * np.exp(0.3j)]]))
    y3, y4 = quasi_free_defect(sq)
    assert y3 < 1e-14 and y4 < 1e-14
    y3, y4 = quasi_free_defect(PairState(np.diag([1.0, 0, 0]).astype(complex), np.zeros((3, 3), complex)))
    assert y3 == 2.0 and y4 == 0.0


def test_particle_expectation():
    assert particle_expectation(PairState.vacuum(4)) == 0.0
    sq = PairState(np.array([[np.sinh(1.0) ** 2]]), np.array([[np.sinh(1.0) * np.cosh(1.0)]]))
    assert particle_expectation(sq) == pytest.approx(SINH2_ONE, rel=1e-15)


def test_vacuum_block_is_admissible():
    assert min_eig_block(PairState.vacuum(3)) == pytest.approx(0.0, abs=1e-15)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**31), scale=st.floats(0.05, 1.5))
def test_squeezing_functions_give_pure_quasi_free_pairs(seed, scale):
    rng = np.random.default_rng(seed)
    lam = scale * random_symmetric(rng, 3)
    G, A, T = squeezing_functions(lam)
    y3, y4 = quasi_free_defect(PairState(G, A))
    assert y3 < 1e-10 * (1 + np.linalg.norm(G)) ** 2 and y4 < 1e-10 * (1 + np.linalg.norm(G)) ** 2
    np.testing.assert_allclose(T, A @ np.linalg.inv(np.eye(3) + G.T), atol=1e-10)
    assert min_eig_block(PairState(G, A)) > -1e-10


def test_squeezed_pair_is_orthogonal_to_condensate():
    rng = np.random.default_rng(4)
    c = rng.normal(size=8) + 1j * rng.normal(size=8)
    c /= np.linalg.norm(c)
    p = squeezed_pair(c, [0.3, 0.1, 0.5])
    np.testing.assert_allclose(p.gamma @ c, 0, atol=1e-14)
    np.testing.assert_allclose(p.alpha @ c.conj(), 0, atol=1e-14)
    y3, y4 = quasi_free_defect(p)
    assert y3 < 1e-14 and y4 < 1e-14
    assert particle_expectation(p) == pytest.approx(np.sum(np.sinh([0.3, 0.1, 0.5]) ** 2))


def test_isospectral_without_pairing():
    rng = np.random.default_rng(5)
    H0, H1 = random_hermitian(rng, 6), random_hermitian(rng, 6)
    G0 = random_hermitian(rng, 6)
    G0 = G0 @ G0
    provider = lambda t: (H0 + np.sin(3 * t) * H1, np.zeros((6, 6)))
    traj = pair_evolve(PairState(G0, np.zeros((6, 6), complex)), provider, 1.0, 1e-3, 100)
    ev0 = np.linalg.eigvalsh(G0)
    drift = max(np.max(np.abs(np.linalg.eigvalsh(s.gamma) - ev0)) for s in traj.states)
    assert drift <= 1e-9


def test_zero_pair_zero_interaction_stays_zero():
    cfg = validate({"interaction": {"params": {"amplitude": 0.0, "radius": 1.0}}, "time": {"t_final": 0.2}})
    run = run_pair(build_scenario(cfg))
    assert all(not np.any(s.gamma) and not np.any(s.alpha) for s in run.pair.states)


def test_structure_drift_and_admissibility_on_scenario():
    cfg = validate(
        {
            "lattice": {"points_per_dim": 8, "box_length": 4.0},
            "initial": {"u0": {"kind": "gaussian_packet", "width": 1.0, "mode": [1]}, "pair": {"kind": "squeezed", "r_list": [0.4, 0.2]}},
            "time": {"t_final": 1.0},
        }
    )
    run = run_pair(build_scenario(cfg))
    assert run.pair.max_symmetry_drift <= 1e-11
    assert not run.pair.flags
    assert np.min(run.pair.diagnostics["min_eig_Gamma"]) >= -1e-8
    assert np.max(run.pair.diagnostics["y3"] + run.pair.diagnostics["y4"]) <= 1e-8
    assert np.all(run.pair.diagnostics["trace_gamma"] < run.envelopes.particle_envelope)


def test_step_blowup_is_reported():
    bad = lambda t: (np.array([[np.nan]]), np.zeros((1, 1)))
    with pytest.raises(NumericalBlowupError):
        pair_step(PairState(np.eye(1, dtype=complex), np.zeros((1, 1), complex), 0.5), bad, 0.1)
