"""Eigenvalue sweeps, branch tracking, and avoided-crossing extraction."""

import numpy as np
import pytest

from mmqed.device import filter_normal_modes, numeric_j, reference_device
from mmqed.spectroscopy import (eigen_sweep, exchange_scan,
                                find_avoided_crossing)

P = reference_device()


def _band_sweep(points=801):
    return eigen_sweep(P, "nu_q1", np.linspace(6.6, 7.7, points))


def test_branch_continuity():
    table = _band_sweep(401)
    step = table.grid[1] - table.grid[0]
    # adjacent eigenvalues move by less than ~10x the parameter step: a
    # branch jump would show up as an O(mode splitting) discontinuity
    assert np.max(np.abs(np.diff(table.energies, axis=0))) < 10 * step


def test_avoided_crossing_gaps():
    # one-excitation spectrum of the full device: three crossings whose
    # minimum gaps overlap (mode spacing 167 MHz is comparable to the
    # single-crossing gaps), so they are smaller than the isolated-crossing
    # estimate 2 g_mode; values frozen from an independent 4x4
    # qubit + normal-mode diagonalization
    table = _band_sweep()
    gaps = [find_avoided_crossing(table, (k, k + 1))[1] for k in (1, 2, 3)]
    np.testing.assert_allclose(np.array(gaps) * 1e3, [115.9, 159.8, 110.1],
                               atol=0.2)


def test_single_isolated_crossing_gap_is_2g():
    # with one mode the textbook result holds exactly: gap = 2 g
    g = 0.095
    p = reference_device(n_modes=1, nu_f=7.169, g_q1f=g, g_q2f=0.0)
    table = eigen_sweep(p, "nu_q1", np.linspace(6.9, 7.45, 1201))
    _, gap = find_avoided_crossing(table, (1, 2))
    assert abs(gap - 2 * g) < 1e-6


def test_widely_spaced_modes_recover_isolated_gaps():
    # stretching the mode spacing x4 makes each crossing isolated; the
    # middle gap then approaches 2 g_q1f/sqrt(2)
    p = reference_device(g_f=0.472)
    table = eigen_sweep(p, "nu_q1", np.linspace(6.9, 7.45, 1201))
    _, gap = find_avoided_crossing(table, (2, 3))
    assert abs(gap - 2 * 0.135 / np.sqrt(2)) / gap < 0.02


def test_gap_invariant_under_grid_refinement():
    coarse = _band_sweep(401)
    fine = _band_sweep(801)
    for pair in ((1, 2), (2, 3), (3, 4)):
        g1 = find_avoided_crossing(coarse, pair)[1]
        g2 = find_avoided_crossing(fine, pair)[1]
        assert abs(g1 - g2) / g2 < 0.005


def test_crossing_at_grid_edge_rejected():
    table = eigen_sweep(P, "nu_q1", np.linspace(6.6, 7.05, 101))
    with pytest.raises(ValueError):
        find_avoided_crossing(table, (3, 4))


def test_qubit_qubit_crossing_gap_is_twice_j():
    # sweeping qubit 1 through a parked qubit 2 below the band: the gap of
    # that avoided crossing equals 2 J
    center = 6.5
    j = numeric_j(P, center)
    table = eigen_sweep(P, "nu_q1", np.linspace(center - 0.02, center + 0.02,
                                                801), fixed_other=center)
    center_fit, gap = find_avoided_crossing(table, (0, 1))
    # the crossing sits slightly below 6.5: qubit 2's dressed frequency is
    # pulled down by the band, and the local J there differs at the % level
    assert abs(center_fit - center) < 0.01
    assert abs(gap - 2 * j) / (2 * j) < 0.02


def test_overlap_column_tracks_probe_state():
    table = _band_sweep(401)
    # each grid point distributes unit probe weight over the branches
    np.testing.assert_allclose(table.overlaps.sum(axis=1), 1.0, atol=1e-9)
    # below the band most probe (qubit-1 excited) weight sits on one branch;
    # at 6.6 GHz the hybridization tails already hold ~5%
    assert table.overlaps[0].max() > 0.9


def test_exchange_scan_rows():
    rows = exchange_scan(P, [6.4, 6.5])
    assert len(rows) == 2
    center, delta, j_num, j_eq, j_single = rows[0]
    assert center == 6.4
    assert abs(delta - (6.4 - 7.169)) < 1e-12
    assert abs(j_num - numeric_j(P, 6.4)) < 1e-12
    # the single-mode 1/Delta law overestimates by ~30x this far out
    assert abs(j_single / j_num) > 10


def test_unsorted_grid_rejected():
    with pytest.raises(ValueError):
        eigen_sweep(P, "nu_q1", np.array([7.0, 6.9, 7.1]))
