"""Tensor-product occupation basis for the qubit-filter system.

A basis label is a tuple (q1, q2, n1, ..., n_nmodes): the level of each qubit
followed by the photon number of each filter site.  The basis is truncated to
a total excitation number cap and ordered by (total excitation, label), so
every fixed-excitation block is a contiguous slice.  The rotating-wave
Hamiltonian conserves total excitation, which makes that block structure the
natural unit of propagation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np


@dataclass(frozen=True)
class Basis:
    qubit_levels: int
    n_modes: int
    photon_cutoff: int
    excitation_cap: int
    labels: tuple = field(repr=False)
    index: dict = field(repr=False)
    exc: np.ndarray = field(repr=False)
    blocks: dict = field(repr=False)  # excitation number -> slice

    @property
    def dim(self) -> int:
        return len(self.labels)

    def qubit_level_vector(self, qubit: int) -> np.ndarray:
        """Occupation level of the given qubit (1 or 2) per basis state."""
        pos = qubit - 1
        return np.array([lab[pos] for lab in self.labels], dtype=float)

    def state(self, label) -> "LabeledState":
        """Basis state |label> as a LabeledState."""
        amps = np.zeros(self.dim, dtype=complex)
        amps[self.index[tuple(label)]] = 1.0
        return LabeledState(amps, self)

    def block_indices(self, excitation: int) -> slice:
        return self.blocks[excitation]


def build_basis(
    qubit_levels: int,
    n_modes: int,
    photon_cutoff: int,
    excitation_cap: int,
    dim_limit: int = 20_000,
) -> Basis:
    if qubit_levels not in (2, 3):
        raise ValueError(f"qubit_levels must be 2 or 3, got {qubit_levels}")
    ranges = [range(qubit_levels)] * 2 + [range(photon_cutoff + 1)] * n_modes
    labels = [lab for lab in product(*ranges) if sum(lab) <= excitation_cap]
    labels.sort(key=lambda lab: (sum(lab), lab))
    if len(labels) > dim_limit:
        raise ValueError(
            f"basis dimension {len(labels)} exceeds the limit {dim_limit}"
        )
    exc = np.array([sum(lab) for lab in labels], dtype=int)
    blocks = {}
    for e in range(excitation_cap + 1):
        hits = np.flatnonzero(exc == e)
        if hits.size:
            blocks[e] = slice(int(hits[0]), int(hits[-1]) + 1)
    return Basis(
        qubit_levels=qubit_levels,
        n_modes=n_modes,
        photon_cutoff=photon_cutoff,
        excitation_cap=excitation_cap,
        labels=tuple(labels),
        index={lab: i for i, lab in enumerate(labels)},
        exc=exc,
        blocks=blocks,
    )


@dataclass
class LabeledState:
    """Complex amplitude vector over an explicit occupation basis."""

    amplitudes: np.ndarray
    basis: Basis

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (self.basis.dim,):
            raise ValueError(
                f"amplitude vector length {self.amplitudes.shape} does not "
                f"match basis dimension {self.basis.dim}"
            )

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def population(self, label) -> float:
        return float(abs(self.amplitudes[self.basis.index[tuple(label)]]) ** 2)

    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def qubit_excited_population(self, qubit: int) -> float:
        """Total population with the given qubit in level >= 1."""
        levels = self.basis.qubit_level_vector(qubit)
        return float(np.sum(self.populations()[levels >= 1]))

    def overlap(self, other: "LabeledState") -> complex:
        return complex(np.vdot(other.amplitudes, self.amplitudes))

    def density_matrix(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def copy(self) -> "LabeledState":
        return LabeledState(self.amplitudes.copy(), self.basis)
