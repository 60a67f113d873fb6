"""Core linear algebra, basis construction, and the closed/open propagators."""

import numpy as np
import pytest

from mmqed.basis import build_basis
from mmqed.device import hamiltonian_parts, reference_device
from mmqed.linalg import (NonHermitianError, check_hermitian, eig_hermitian,
                          kron, unitarity_defect)
from mmqed.propagate import propagate, propagate_open
from mmqed.schedule import constant_schedule, evolve_schedule_open


# ---------------------------------------------------------------- kron / eig

def test_kron_matches_index_formula():
    rng = np.random.default_rng(0)
    a = rng.normal(size=(3, 2)) + 1j * rng.normal(size=(3, 2))
    b = rng.normal(size=(2, 4)) + 1j * rng.normal(size=(2, 4))
    k = kron(a, b)
    assert k.shape == (6, 8)
    expected = np.empty((6, 8), dtype=complex)
    for i in range(3):
        for j in range(2):
            for m in range(2):
                for n in range(4):
                    # left factor outermost
                    expected[i * 2 + m, j * 4 + n] = a[i, j] * b[m, n]
    np.testing.assert_allclose(k, expected, rtol=1e-14)


def test_eig_hermitian_residual_and_orthonormality():
    rng = np.random.default_rng(1)
    h = rng.normal(size=(12, 12)) + 1j * rng.normal(size=(12, 12))
    h = h + h.conj().T
    w, v = eig_hermitian(h)
    scale = np.linalg.norm(h)
    assert np.max(np.abs(h @ v - v * w)) < 1e-9 * scale
    assert np.max(np.abs(v.conj().T @ v - np.eye(12))) < 1e-9
    assert np.all(np.diff(w) >= 0)


def test_eig_hermitian_rejects_non_hermitian():
    h = np.array([[0.0, 1.0], [0.0, 0.0]])
    with pytest.raises(NonHermitianError):
        eig_hermitian(h)
    with pytest.raises(NonHermitianError):
        check_hermitian(h)


# ------------------------------------------------------------------- basis

def test_basis_blocks_are_contiguous_and_complete():
    basis = build_basis(2, 3, 2, 2)
    total = 0
    for exc in range(3):
        sl = basis.block_indices(exc)
        assert np.all(basis.exc[sl] == exc)
        total += sl.stop - sl.start
    assert total == basis.dim
    # labels are unique and respect the cap
    assert len(set(basis.labels)) == basis.dim
    assert all(sum(lab) <= 2 for lab in basis.labels)


# -------------------------------------------------------------- propagation

def _resonant_jc(g=0.05, nu=7.0):
    """Single mode resonant with qubit 1; qubit 2 decoupled far away."""
    return reference_device(n_modes=1, nu_f=nu, g_q1f=g, g_q2f=0.0,
                        photon_cutoff=1, excitation_cap=1)


def test_vacuum_rabi_oscillation():
    # resonant JC: excitation swaps as cos^2(2 pi g t)
    g = 0.05
    p = _resonant_jc(g=g)
    parts = hamiltonian_parts(p)
    psi0 = parts.basis.state((1, 0, 0))

    def h_of_t(t):
        return parts.hamiltonian(7.0, 3.0)

    for t in (1.0, 2.5, 1.0 / (4.0 * g)):
        psi = propagate(h_of_t, psi0, (0.0, t), dt=0.005)
        expected = np.cos(2.0 * np.pi * g * t) ** 2
        assert abs(psi.population((1, 0, 0)) - expected) < 1e-6


def test_norm_conservation_long_evolution():
    p = reference_device()
    parts = hamiltonian_parts(p)
    psi0 = parts.basis.state((1, 0, 0, 0, 0))

    def h_of_t(t):
        return parts.hamiltonian(6.8 + 0.4 * np.sin(0.01 * t), 5.0)

    psi = propagate(h_of_t, psi0, (0.0, 1000.0), dt=0.05)
    assert abs(psi.norm - 1.0) < 1e-9


def test_propagate_step_size_convergence():
    p = _resonant_jc()
    parts = hamiltonian_parts(p)
    psi0 = parts.basis.state((1, 0, 0))

    def h_of_t(t):
        return parts.hamiltonian(7.0 + 0.3 * np.sin(0.2 * t), 3.0)

    a = propagate(h_of_t, psi0, (0.0, 50.0), dt=0.01)
    b = propagate(h_of_t, psi0, (0.0, 50.0), dt=0.005)
    fid = abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2
    assert fid > 1.0 - 1e-8


# ------------------------------------------------------------- open system

def test_amplitude_damping_matches_exponential():
    t1_ns = 2.36e3
    p = _resonant_jc(g=0.0)
    parts = hamiltonian_parts(p)
    basis = parts.basis
    rho0 = basis.state((1, 0, 0)).density_matrix()
    t = 1180.0  # T1/2

    def h_of_t(_):
        return parts.hamiltonian(7.0, 3.0)

    rho = propagate_open(h_of_t, rho0, basis, (0.0, t), t1_us=(2.36, np.inf),
                         dt=0.05)
    idx = basis.index[(1, 0, 0)]
    expected = np.exp(-t / t1_ns)
    assert abs(rho[idx, idx].real - expected) / expected < 0.02


def test_trace_and_positivity_preserved():
    p = reference_device()
    parts = hamiltonian_parts(p)
    basis = parts.basis
    psi = (basis.state((1, 0, 0, 0, 0)).amplitudes
           + basis.state((0, 0, 0, 0, 0)).amplitudes) / np.sqrt(2)
    rho0 = np.outer(psi, psi.conj())
    rho = evolve_schedule_open(parts, constant_schedule(6.9, 5.0, 200.0),
                               rho0, t1_us=(2.36, 2.14),
                               sigma_ns=(312.0, 492.0), realizations=8,
                               dt=0.05, seed=4)
    assert abs(np.trace(rho).real - 1.0) < 1e-9
    assert np.min(np.linalg.eigvalsh(rho)) > -1e-9


def test_quasi_static_dephasing_gaussian_envelope():
    # isolated qubit superposition decays as exp(-t^2 / 2 sigma^2)
    sigma = 312.0
    p = _resonant_jc(g=0.0)
    parts = hamiltonian_parts(p)
    basis = parts.basis
    psi = (basis.state((0, 0, 0)).amplitudes
           + basis.state((1, 0, 0)).amplitudes) / np.sqrt(2)
    rho0 = np.outer(psi, psi.conj())
    i0 = basis.index[(0, 0, 0)]
    i1 = basis.index[(1, 0, 0)]
    for t in (sigma, 2.0 * sigma):
        rho = evolve_schedule_open(parts, constant_schedule(7.0, 3.0, t),
                                   rho0, sigma_ns=(sigma, np.inf),
                                   realizations=400, dt=0.5, seed=2)
        envelope = 2.0 * abs(rho[i1, i0])
        expected = np.exp(-t ** 2 / (2.0 * sigma ** 2))
        # Monte Carlo over 400 quasi-static detunings
        assert abs(envelope - expected) < 0.05


def test_unitarity_defect_detects_non_unitary():
    assert unitarity_defect(np.eye(3)) < 1e-15
    assert unitarity_defect(2.0 * np.eye(3)) > 1.0
