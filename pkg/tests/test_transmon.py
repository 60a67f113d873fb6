"""Charge-basis transmon levels, flux tuning, and the frequency inverse."""

import numpy as np
import pytest

from mmqed.transmon import (CutoffError, OutOfBandError, TransmonParams,
                            anharmonicity, flux_to_ej, frequency_to_flux,
                            nu01, transmon_levels)

P = TransmonParams()


def test_levels_match_independent_construction():
    # independent oracle: build the charge matrix with scipy sparse tools
    # and a different diagonalizer
    from scipy.linalg import eigh_tridiagonal
    e_c, e_j, n_g, cut = 0.25, 41.0, 0.5, 20
    n = np.arange(-cut, cut + 1, dtype=float)
    w = eigh_tridiagonal(4.0 * e_c * (n - n_g) ** 2,
                         np.full(2 * cut, -e_j / 2.0),
                         eigvals_only=True)
    oracle = w[:4] - w[0]
    np.testing.assert_allclose(transmon_levels(P, e_j), oracle, atol=1e-10)


def test_asymptotic_transmon_frequency():
    # deep transmon limit: nu01 ~ sqrt(8 Ec Ej) - Ec
    assert abs(nu01(P, 0.0) - (np.sqrt(8 * 0.25 * 41.0) - 0.25)) < 0.05
    # frozen regression values for the default parameters
    assert abs(nu01(P, 0.0) - 8.797926) < 1e-5
    assert abs(anharmonicity(P, 0.0) - (-0.267825)) < 1e-5


def test_spectrum_even_and_periodic_in_gate_charge():
    e_j = 30.0
    base = transmon_levels(TransmonParams(n_g=0.3), e_j)
    np.testing.assert_allclose(
        transmon_levels(TransmonParams(n_g=-0.3), e_j), base, atol=1e-9)
    np.testing.assert_allclose(
        transmon_levels(TransmonParams(n_g=1.3, charge_cutoff=21), e_j),
        base, atol=1e-9)


def test_cutoff_convergence_guard():
    # a cutoff too small for the requested Ej raises instead of returning
    # unconverged levels
    with pytest.raises(CutoffError):
        transmon_levels(TransmonParams(charge_cutoff=10), 400.0)


def test_flux_arc_covers_band():
    assert flux_to_ej(P, 0.0) == 41.0
    assert flux_to_ej(P, 0.5) < 1e-12
    freqs = [nu01(P, phi) for phi in np.linspace(0.0, 0.49, 25)]
    assert all(np.diff(freqs) < 0)      # monotone arc
    assert freqs[0] > 8.5               # ~9 GHz at the sweet spot
    assert freqs[-1] < 1.5              # approaches the bottom of the band


def test_frequency_to_flux_inverse():
    for target in (8.0, 7.169, 6.4, 3.0):
        phi = frequency_to_flux(P, target)
        assert abs(nu01(P, phi) - target) < 1e-6  # 1 kHz


def test_frequency_to_flux_out_of_band():
    with pytest.raises(OutOfBandError):
        frequency_to_flux(P, 9.5)


def test_negative_ej_rejected():
    with pytest.raises(ValueError):
        transmon_levels(P, -1.0)
