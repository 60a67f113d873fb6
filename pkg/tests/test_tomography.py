"""Tomography reconstruction, fidelity, concurrence, and bootstrap."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mmqed import tomography as tomo

BELL_PHI = np.array([1, 0, 0, 1]) / np.sqrt(2)
BELL_PSI = np.array([0, 1, 1, 0]) / np.sqrt(2)


def _random_pure(rng):
    psi = rng.normal(size=4) + 1j * rng.normal(size=4)
    return psi / np.linalg.norm(psi)


def _random_rho(rng, rank=4):
    a = rng.normal(size=(4, rank)) + 1j * rng.normal(size=(4, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def _exact_counts(rho, scale=1e6):
    return {s: tomo.outcome_probabilities(rho, s) * scale
            for s in tomo.SETTINGS}


# ------------------------------------------------------------ reconstruction

def test_round_trip_exact_probabilities():
    rng = np.random.default_rng(0)
    for _ in range(10):
        rho = _random_rho(rng)
        rec = tomo.reconstruct_state(_exact_counts(rho))
        assert np.max(np.abs(rec - rho)) < 1e-9


def test_round_trip_converges_with_shots():
    rng = np.random.default_rng(1)
    rho = np.outer(BELL_PHI, BELL_PHI)
    for shots in (400, 10000, 250000):
        counts = tomo.simulate_measurements(rho, tomo.SETTINGS, shots,
                                            seed=int(rng.integers(1 << 30)))
        rec = tomo.reconstruct_state(counts)
        fid = tomo.state_fidelity(rec, BELL_PHI)
        assert fid >= 1.0 - 5.0 / np.sqrt(shots)


def test_reconstruction_is_psd_unit_trace():
    rng = np.random.default_rng(2)
    rho = _random_rho(rng, rank=1)
    counts = tomo.simulate_measurements(rho, tomo.SETTINGS, 50, seed=5)
    rec = tomo.reconstruct_state(counts)
    assert abs(np.trace(rec).real - 1.0) < 1e-12
    assert np.min(np.linalg.eigvalsh(rec)) > -1e-12


def test_missing_setting_rejected():
    counts = _exact_counts(np.eye(4) / 4)
    del counts[("X", "Y")]
    with pytest.raises(tomo.MissingSettingsError):
        tomo.reconstruct_state(counts)


def test_simulate_measurements_deterministic():
    rho = np.outer(BELL_PHI, BELL_PHI)
    a = tomo.simulate_measurements(rho, tomo.SETTINGS, 1000, seed=7)
    b = tomo.simulate_measurements(rho, tomo.SETTINGS, 1000, seed=7)
    assert all(np.array_equal(a[s], b[s]) for s in tomo.SETTINGS)


# ------------------------------------------------------- fidelity/concurrence

def test_bell_states_maximally_entangled():
    for psi in (BELL_PHI, BELL_PSI):
        rho = np.outer(psi, psi.conj())
        assert abs(tomo.concurrence(rho) - 1.0) < 1e-12
        assert abs(tomo.state_fidelity(rho, psi) - 1.0) < 1e-12


def test_product_state_has_zero_concurrence():
    psi = np.kron([1, 1], [1, -1j]) / 2.0
    assert tomo.concurrence(np.outer(psi, psi.conj())) < 1e-12


def test_werner_state_concurrence_closed_form():
    rho_b = np.outer(BELL_PHI, BELL_PHI)
    for p in (0.0, 0.2, 1 / 3, 0.5, 0.8, 1.0):
        rho = p * rho_b + (1 - p) * np.eye(4) / 4.0
        expected = max(0.0, (3.0 * p - 1.0) / 2.0)
        assert abs(tomo.concurrence(rho) - expected) < 1e-9


def test_bell_fidelity_maximizes_over_phase():
    phi = 0.73
    psi = np.array([1, 0, 0, np.exp(1j * phi)]) / np.sqrt(2)
    rho = np.outer(psi, psi.conj())
    fid, phase = tomo.bell_fidelity(rho)
    assert abs(fid - 1.0) < 1e-12
    assert abs((phase - phi + np.pi) % (2 * np.pi) - np.pi) < 1e-9


def test_fidelity_linear_and_bounded():
    rng = np.random.default_rng(3)
    psi = _random_pure(rng)
    a, b = _random_rho(rng), _random_rho(rng)
    fa = tomo.state_fidelity(a, psi)
    fb = tomo.state_fidelity(b, psi)
    mix = tomo.state_fidelity(0.3 * a + 0.7 * b, psi)
    assert abs(mix - (0.3 * fa + 0.7 * fb)) < 1e-12
    assert fa <= np.max(np.linalg.eigvalsh(a)) + 1e-12


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_concurrence_invariant_under_local_unitaries(seed):
    rng = np.random.default_rng(seed)
    rho = _random_rho(rng, rank=2)

    def haar2(r):
        q, _ = np.linalg.qr(r.normal(size=(2, 2)) + 1j * r.normal(size=(2, 2)))
        return q

    u = np.kron(haar2(rng), haar2(rng))
    rotated = u @ rho @ u.conj().T
    assert abs(tomo.concurrence(rotated) - tomo.concurrence(rho)) < 1e-9


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_reconstruction_round_trip_random_states(seed):
    rng = np.random.default_rng(seed)
    rho = _random_rho(rng)
    rec = tomo.reconstruct_state(_exact_counts(rho))
    assert np.max(np.abs(rec - rho)) < 1e-9


# ------------------------------------------------------------------ bootstrap

def test_bootstrap_interval_covers_truth():
    rho = 0.95 * np.outer(BELL_PHI, BELL_PHI) + 0.05 * np.eye(4) / 4.0
    counts = tomo.simulate_measurements(rho, tomo.SETTINGS, 5000, seed=11)
    out = tomo.bootstrap(counts, lambda r: tomo.bell_fidelity(r)[0],
                         resamples=200, seed=1)
    truth = tomo.bell_fidelity(rho)[0]
    assert out["low"] - 0.01 <= truth <= out["high"] + 0.01
    assert 0.0 < out["std"] < 0.05
    # deterministic under the same seed
    again = tomo.bootstrap(counts, lambda r: tomo.bell_fidelity(r)[0],
                           resamples=200, seed=1)
    assert again["mean"] == out["mean"]
