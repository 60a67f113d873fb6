"""Qubit-filter Hamiltonian for an n-mode resonator chain.

Two qubits couple to the two end sites of a chain of n identical resonators.
In the rotating-wave form used here the total excitation number is conserved
exactly, so the Hamiltonian is block diagonal over excitation sectors.

Energies use the number-operator convention (the joint ground state sits at
zero), which differs from the sigma-Z/2 form only by a global offset.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .basis import Basis, build_basis
from .linalg import eig_hermitian

# Fitted device profile: filter at 7.169 GHz, filter-filter coupling 118 MHz,
# qubit-end couplings 135/144 MHz, T1 = 2.36/2.14 us, Ramsey sigma 312/492 ns.
REFERENCE_DEVICE = dict(
    n_modes=3,
    nu_f=7.169,
    g_f=0.118,
    g_q1f=0.135,
    g_q2f=0.144,
    t1=(2.36, 2.14),
    ramsey_sigma=(312.0, 492.0),
)


@dataclass(frozen=True)
class DeviceParams:
    n_modes: int = 3
    nu_f: float = 7.169            # bare filter frequency, GHz
    g_f: float = 0.118             # filter-filter coupling, GHz
    g_q1f: float = 0.135           # qubit 1 to end resonator, GHz
    g_q2f: float = 0.144           # qubit 2 to end resonator, GHz
    qubit_levels: int = 2
    anharmonicity: tuple = (-0.27, -0.27)   # GHz, used when qubit_levels=3
    photon_cutoff: int = 3
    excitation_cap: int = 3
    t1: tuple = (np.inf, np.inf)            # us per qubit
    ramsey_sigma: tuple = (np.inf, np.inf)  # ns per qubit (Gaussian decay)
    dim_limit: int = 20_000

    def __post_init__(self):
        if self.n_modes < 1:
            raise ValueError("n_modes must be >= 1")
        if min(self.g_f, self.g_q1f, self.g_q2f) < 0:
            raise ValueError("couplings must be non-negative")
        if self.photon_cutoff < 1:
            raise ValueError("photon_cutoff must be >= 1")
        if self.qubit_levels not in (2, 3):
            raise ValueError("qubit_levels must be 2 or 3")

    def with_(self, **kwargs) -> "DeviceParams":
        return replace(self, **kwargs)

    def basis(self) -> Basis:
        return build_basis(
            self.qubit_levels,
            self.n_modes,
            self.photon_cutoff,
            self.excitation_cap,
            self.dim_limit,
        )


def reference_device(**overrides) -> DeviceParams:
    """Device with the fitted profile constants; overrides win."""
    merged = {**REFERENCE_DEVICE, **overrides}
    return DeviceParams(**merged)


@dataclass(frozen=True)
class HamiltonianParts:
    """H(nu1, nu2) = static + diag(nu1 * d1 + nu2 * d2)."""

    static: np.ndarray = field(repr=False)
    d1: np.ndarray = field(repr=False)
    d2: np.ndarray = field(repr=False)
    basis: Basis = None

    def hamiltonian(self, nu_q1: float, nu_q2: float) -> np.ndarray:
        h = self.static.copy()
        idx = np.arange(h.shape[0])
        h[idx, idx] += nu_q1 * self.d1 + nu_q2 * self.d2
        return h

    def block(self, excitation: int):
        """(static, d1, d2) restricted to one total-excitation sector."""
        sl = self.basis.block_indices(excitation)
        return self.static[sl, sl], self.d1[sl], self.d2[sl], sl


def _qubit_lower_element(level_from: int) -> float:
    # <m-1| b |m> = sqrt(m): harmonic-ladder element, sqrt(2) on 1<->2
    return np.sqrt(level_from)


def hamiltonian_parts(p: DeviceParams, basis: Basis | None = None) -> HamiltonianParts:
    """Frequency-independent pieces of the full Hamiltonian."""
    basis = basis or p.basis()
    dim = basis.dim
    h = np.zeros((dim, dim), dtype=complex)
    nq = p.n_modes

    for i, lab in enumerate(basis.labels):
        q1, q2 = lab[0], lab[1]
        photons = lab[2:]
        # filter site energies
        diag = p.nu_f * sum(photons)
        # anharmonic qubit levels: level 2 sits at 2*nu + alpha
        if q1 == 2:
            diag += p.anharmonicity[0]
        if q2 == 2:
            diag += p.anharmonicity[1]
        h[i, i] += diag

        def hop(target_label, amp):
            j = basis.index.get(tuple(target_label))
            if j is not None:
                h[j, i] += amp

        # filter-filter hopping a_s† a_{s-1} + h.c.
        for s in range(1, nq):
            if photons[s] > 0 and photons[s - 1] < p.photon_cutoff:
                tgt = list(lab)
                tgt[2 + s] -= 1
                tgt[2 + s - 1] += 1
                amp = p.g_f * np.sqrt(photons[s] * (photons[s - 1] + 1))
                hop(tgt, amp)
            if photons[s - 1] > 0 and photons[s] < p.photon_cutoff:
                tgt = list(lab)
                tgt[2 + s - 1] -= 1
                tgt[2 + s] += 1
                amp = p.g_f * np.sqrt(photons[s - 1] * (photons[s] + 1))
                hop(tgt, amp)

        # qubit-filter exchange: qubit 1 <-> site 1, qubit 2 <-> site n
        for (qpos, site, g) in ((0, 0, p.g_q1f), (1, nq - 1, p.g_q2f)):
            qlev = lab[qpos]
            nphot = photons[site]
            if qlev > 0 and nphot < p.photon_cutoff:
                tgt = list(lab)
                tgt[qpos] -= 1
                tgt[2 + site] += 1
                hop(tgt, g * _qubit_lower_element(qlev) * np.sqrt(nphot + 1))
            if qlev < p.qubit_levels - 1 and nphot > 0:
                tgt = list(lab)
                tgt[qpos] += 1
                tgt[2 + site] -= 1
                hop(tgt, g * _qubit_lower_element(qlev + 1) * np.sqrt(nphot))

    d1 = basis.qubit_level_vector(1)
    d2 = basis.qubit_level_vector(2)
    return HamiltonianParts(static=h, d1=d1, d2=d2, basis=basis)


def build_hamiltonian(p: DeviceParams, nu_q1: float, nu_q2: float,
                      basis: Basis | None = None):
    """Full Hamiltonian at fixed qubit frequencies; returns (matrix, basis)."""
    if nu_q1 <= 0 or nu_q2 <= 0:
        raise ValueError("qubit frequencies must be positive")
    parts = hamiltonian_parts(p, basis)
    return parts.hamiltonian(nu_q1, nu_q2), parts.basis


def filter_normal_modes(p: DeviceParams):
    """Normal modes of the bare n-site chain.

    Returns a list of (frequency GHz, end-site amplitudes (left, right),
    qubit-mode couplings (g_q1_mode, g_q2_mode)), ascending in frequency.
    """
    n = p.n_modes
    chain = np.diag(np.full(n, p.nu_f)) + np.diag(np.full(n - 1, p.g_f), 1) \
        + np.diag(np.full(n - 1, p.g_f), -1)
    w, v = np.linalg.eigh(chain)
    modes = []
    for i in range(n):
        left, right = abs(v[0, i]), abs(v[-1, i])
        modes.append((float(w[i]), (float(left), float(right)),
                      (p.g_q1f * left, p.g_q2f * right)))
    return modes


@dataclass(frozen=True)
class EffectiveCouplings:
    j: float       # exchange rate, GHz
    xi: float      # c-phase rate, GHz
    delta: float   # detuning from the bare filter frequency, GHz


def approx_j(p: DeviceParams, delta: float) -> float:
    """Virtual-photon exchange rate (g_Q^2/g_F)(g_F/Delta)^n.

    Delta is the averaged detuning of the qubits from the bare filter
    frequency; the formula is singular (and invalid) on resonance.
    """
    if delta == 0:
        raise ValueError("delta = 0: off-resonant formula is singular")
    g_q = 0.5 * (p.g_q1f + p.g_q2f)
    return (g_q**2 / p.g_f) * (p.g_f / delta) ** p.n_modes


def approx_xi(p: DeviceParams, delta: float) -> float:
    """C-phase rate 4 n J^2 / Delta in the same off-resonant regime."""
    if delta == 0:
        raise ValueError("delta = 0: off-resonant formula is singular")
    j = approx_j(p, delta)
    return 4.0 * p.n_modes * j**2 / delta


class BranchTrackingError(RuntimeError):
    """Qubit-like eigenbranches could not be identified unambiguously."""


def _single_excitation_parts(p: DeviceParams) -> HamiltonianParts:
    single = p.with_(qubit_levels=2, photon_cutoff=1, excitation_cap=1)
    return hamiltonian_parts(single)


def numeric_j(p: DeviceParams, nu_q_center: float, halfwidth: float | None = None,
              points: int = 81) -> float:
    """Exchange rate from the avoided crossing of the two qubit branches.

    Sweeps nu_q2 across nu_q1 = nu_q_center in the single-excitation block
    and returns half the minimum gap (with parabolic refinement).
    """
    parts = _single_excitation_parts(p)
    basis = parts.basis
    sl = basis.block_indices(1)
    h0 = parts.static[sl, sl]
    d1, d2 = parts.d1[sl], parts.d2[sl]
    i_q1 = np.flatnonzero(d1 == 1)[0]
    i_q2 = np.flatnonzero(d2 == 1)[0]

    if p.g_q2f == 0 or p.g_q1f == 0:
        return 0.0

    if halfwidth is None:
        delta = nu_q_center - p.nu_f
        halfwidth = max(10.0 * abs(approx_j(p, delta)), 2e-4)

    idx = np.arange(h0.shape[0])
    for _ in range(8):
        grid = np.linspace(nu_q_center - halfwidth, nu_q_center + halfwidth, points)
        gaps = np.empty(len(grid))
        for k, nu2 in enumerate(grid):
            h = h0.copy()
            h[idx, idx] += nu_q_center * d1 + nu2 * d2
            w, v = np.linalg.eigh(h)
            weight = np.abs(v[i_q1, :]) ** 2 + np.abs(v[i_q2, :]) ** 2
            top2 = np.argsort(weight)[-2:]
            if weight[top2].min() < 0.25 or weight[top2].sum() < 1.0:
                raise BranchTrackingError(
                    f"qubit-like branches ambiguous at nu_q2={nu2:.4f} GHz "
                    f"(weights {weight[top2]}); center too close to the band"
                )
            gaps[k] = abs(w[top2[0]] - w[top2[1]])
        k0 = int(np.argmin(gaps))
        if 0 < k0 < len(grid) - 1:
            break
        halfwidth *= 3.0  # minimum at the edge: widen the window
    else:
        raise BranchTrackingError("could not bracket the minimum gap")

    # parabolic refinement through the three points around the minimum
    y0, y1, y2 = gaps[k0 - 1], gaps[k0], gaps[k0 + 1]
    denom = y0 - 2 * y1 + y2
    gap = y1 if denom <= 0 else y1 - (y0 - y2) ** 2 / (8 * denom)
    return 0.5 * float(gap)


def _dressed_energy(h: np.ndarray, bare_index: int, min_overlap: float = 0.5) -> float:
    w, v = np.linalg.eigh(h)
    weights = np.abs(v[bare_index, :]) ** 2
    k = int(np.argmax(weights))
    if weights[k] < min_overlap:
        raise BranchTrackingError(
            f"dressed-state assignment ambiguous (max overlap {weights[k]:.3f})"
        )
    return float(w[k])


def numeric_xi(p: DeviceParams, nu_q1: float, nu_q2: float) -> float:
    """C-phase rate from exact dressed eigenenergies.

    xi = (E_ee + E_gg - E_eg - E_ge) / 4 with dressed states assigned by
    maximum overlap with the bare computational states (sigma_Z|e> = +|e>).
    """
    if p.excitation_cap < 2:
        raise ValueError("excitation_cap must be >= 2 for xi")
    parts = hamiltonian_parts(p)
    basis = parts.basis
    h = parts.hamiltonian(nu_q1, nu_q2)
    zeros = (0,) * p.n_modes
    e = {}
    for name, lab in (("gg", (0, 0)), ("eg", (1, 0)), ("ge", (0, 1)), ("ee", (1, 1))):
        e[name] = _dressed_energy(h, basis.index[lab + zeros])
    return (e["ee"] + e["gg"] - e["eg"] - e["ge"]) / 4.0
