"""Eigenvalue sweeps and avoided-crossing extraction.

Branches are tracked across the grid by maximum eigenvector overlap with the
previous point (energy ordering swaps branches at every crossing).  The
overlap column with a probe state emulates what qubit spectroscopy actually
measures: the weight of the bare excited-qubit state in each dressed level.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from . import transmon as tr
from .device import DeviceParams, approx_j, hamiltonian_parts, numeric_j


@dataclass
class SpectrumTable:
    axis: str
    grid: np.ndarray
    energies: np.ndarray            # (npoints, nlevels), branch-tracked
    overlaps: np.ndarray            # (npoints, nlevels), with the probe state
    probe_label: tuple = None

    def __post_init__(self):
        if self.energies.shape != (len(self.grid), self.energies.shape[1]):
            raise ValueError("energies shape inconsistent with grid")
        if self.overlaps.shape != self.energies.shape:
            raise ValueError("overlaps shape inconsistent with energies")

    def write_csv(self, path):
        nlev = self.energies.shape[1]
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow([self.axis]
                            + [f"energy_{k}" for k in range(nlev)]
                            + [f"overlap_{k}" for k in range(nlev)])
            for i, x in enumerate(self.grid):
                writer.writerow([repr(float(x))]
                                + [repr(float(e)) for e in self.energies[i]]
                                + [repr(float(o)) for o in self.overlaps[i]])


def _track_order(v_prev: np.ndarray, v_now: np.ndarray) -> np.ndarray:
    """Greedy column permutation maximizing overlap with the previous point."""
    n = v_now.shape[1]
    overlap = np.abs(v_prev.conj().T @ v_now) ** 2
    order = np.full(n, -1)
    taken = np.zeros(n, dtype=bool)
    for k in np.argsort(overlap.max(axis=1))[::-1]:
        j = int(np.argmax(np.where(taken, -1.0, overlap[k])))
        order[k] = j
        taken[j] = True
    return order


def eigen_sweep(p: DeviceParams, axis: str, grid, block: int = 1,
                fixed_other: float = 5.0, probe=None,
                transmons=None) -> SpectrumTable:
    """Eigenvalues of one excitation sector versus a swept qubit parameter.

    axis: 'nu_q1', 'nu_q2', 'flux1' or 'flux2' (flux axes need `transmons`,
    a pair of TransmonParams supplying nu01(flux)).  The non-swept qubit sits
    at `fixed_other` GHz.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.size and np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing")
    parts = hamiltonian_parts(p)
    basis = parts.basis
    sl = basis.block_indices(block)
    h0 = parts.static[sl, sl]
    d1, d2 = parts.d1[sl], parts.d2[sl]
    idx = np.arange(h0.shape[0])

    if axis in ("flux1", "flux2"):
        if transmons is None:
            raise ValueError("flux axes require transmon parameters")
        qubit = 1 if axis == "flux1" else 2
        tp = transmons[qubit - 1]
        nus = np.array([tr.nu01(tp, phi) for phi in grid])
    elif axis in ("nu_q1", "nu_q2"):
        qubit = 1 if axis == "nu_q1" else 2
        nus = grid
    else:
        raise ValueError(f"unknown sweep axis {axis!r}")

    if probe is None:
        zeros = (0,) * p.n_modes
        probe = (1, 0) + zeros if qubit == 1 else (0, 1) + zeros
    i_probe = basis.index[tuple(probe)] - sl.start

    npts, nlev = len(grid), h0.shape[0]
    energies = np.empty((npts, nlev))
    overlaps = np.empty((npts, nlev))
    v_prev = None
    for i, nu in enumerate(nus):
        h = h0.copy()
        nu1 = nu if qubit == 1 else fixed_other
        nu2 = nu if qubit == 2 else fixed_other
        h[idx, idx] += nu1 * d1 + nu2 * d2
        w, v = np.linalg.eigh(h)
        if v_prev is not None:
            order = _track_order(v_prev, v)
            w, v = w[order], v[:, order]
        energies[i] = w
        overlaps[i] = np.abs(v[i_probe, :]) ** 2
        v_prev = v
    return SpectrumTable(axis=axis, grid=grid, energies=energies,
                         overlaps=overlaps, probe_label=tuple(probe))


class CrossingError(ValueError):
    """The requested avoided crossing is not bracketed by the grid."""


def find_avoided_crossing(table: SpectrumTable, branch_pair) -> tuple:
    """(location, gap) of the minimum separation of two tracked branches.

    Parabolic refinement around the discrete minimum; a minimum at the grid
    edge is rejected (the grid does not bracket the crossing).
    """
    a, b = branch_pair
    gaps = np.abs(table.energies[:, a] - table.energies[:, b])
    k = int(np.argmin(gaps))
    if k == 0 or k == len(gaps) - 1:
        raise CrossingError("minimum separation at the grid edge; widen the grid")
    x0, x1, x2 = table.grid[k - 1:k + 2]
    y0, y1, y2 = gaps[k - 1:k + 2]
    denom = y0 - 2 * y1 + y2
    if denom <= 0:
        return float(table.grid[k]), float(y1)
    # uniform-grid parabolic vertex
    shift = 0.5 * (y0 - y2) / denom
    step = 0.5 * (x2 - x0)
    gap = y1 - 0.125 * (y0 - y2) ** 2 / denom
    return float(x1 + shift * step), float(gap)


def exchange_scan(p: DeviceParams, centers) -> list:
    """Exchange rate versus detuning.

    Returns rows (center GHz, delta GHz, J numeric GHz, J closed-form GHz,
    J single-mode-law GHz)."""
    g_q = 0.5 * (p.g_q1f + p.g_q2f)
    rows = []
    for center in centers:
        delta = center - p.nu_f
        rows.append((
            float(center),
            float(delta),
            float(numeric_j(p, center)),
            float(approx_j(p, delta)),
            float(g_q**2 / delta),
        ))
    return rows


def write_exchange_csv(rows, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["nu_q", "delta", "j_numeric", "j_closed_form",
                         "j_single_mode"])
        for row in rows:
            writer.writerow([repr(x) for x in row])
