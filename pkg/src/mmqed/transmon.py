"""Transmon energy levels in the charge basis, and the flux <-> frequency maps.

The default parameters are chosen so the maximum 0-1 frequency is about
9 GHz, covering the 1-9 GHz tuning band of the device profile.  They emulate
the device rather than fit it (the fabricated junction parameters are not
part of the public profile).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class CutoffError(ValueError):
    """Charge-basis cutoff too small for converged low-lying levels."""


class OutOfBandError(ValueError):
    """Requested qubit frequency outside the flux-achievable band."""


@dataclass(frozen=True)
class TransmonParams:
    e_c: float = 0.25          # charging energy, GHz
    e_j_max: float = 41.0      # maximum Josephson energy, GHz
    charge_cutoff: int = 20    # charge basis runs -N..N
    n_g: float = 0.5           # gate charge offset

    def __post_init__(self):
        if self.e_c <= 0 or self.e_j_max <= 0:
            raise ValueError("e_c and e_j_max must be positive")
        if self.charge_cutoff < 10:
            raise ValueError("charge_cutoff must be at least 10")


def _charge_levels(e_c, e_j, n_g, cutoff, k):
    n = np.arange(-cutoff, cutoff + 1, dtype=float)
    diag = 4.0 * e_c * (n - n_g) ** 2
    off = np.full(len(n) - 1, -e_j / 2.0)
    levels = np.linalg.eigvalsh(np.diag(diag) + np.diag(off, 1) + np.diag(off, -1))
    return levels[:k]


def transmon_levels(p: TransmonParams, e_j: float, k: int = 4) -> np.ndarray:
    """Lowest k charge-basis eigenenergies, ascending and ground-referenced.

    The cutoff is validated by recomputing with cutoff+5; a relative change
    above 1e-9 on any returned level raises CutoffError.
    """
    if e_j < 0:
        raise ValueError("e_j must be non-negative")
    levels = _charge_levels(p.e_c, e_j, p.n_g, p.charge_cutoff, k)
    check = _charge_levels(p.e_c, e_j, p.n_g, p.charge_cutoff + 5, k)
    scale = max(abs(check[-1]), 1.0)
    if np.max(np.abs(levels - check)) / scale > 1e-9:
        raise CutoffError(
            f"charge_cutoff={p.charge_cutoff} not converged for e_j={e_j}"
        )
    return levels - levels[0]


def flux_to_ej(p: TransmonParams, phi: float) -> float:
    """Josephson energy of a symmetric SQUID at flux phi (in Phi_0)."""
    return p.e_j_max * abs(np.cos(np.pi * phi))


def nu01(p: TransmonParams, phi: float) -> float:
    """Qubit 0-1 transition frequency at the given flux."""
    levels = transmon_levels(p, flux_to_ej(p, phi), k=2)
    return float(levels[1])


def anharmonicity(p: TransmonParams, phi: float = 0.0) -> float:
    """nu12 - nu01 at the given flux (negative in the transmon regime)."""
    levels = transmon_levels(p, flux_to_ej(p, phi), k=3)
    return float((levels[2] - levels[1]) - levels[1])


def frequency_to_flux(p: TransmonParams, target_nu: float, tol: float = 1e-6) -> float:
    """Flux (in Phi_0, on [0, 0.5]) at which nu01 equals target_nu.

    Bisection on the monotone arc nu01(phi); tol is in GHz (1e-6 = 1 kHz).
    """
    lo, hi = 0.0, 0.4999
    nu_hi, nu_lo = nu01(p, lo), nu01(p, hi)
    if not (nu_lo - 1e-12 <= target_nu <= nu_hi + 1e-12):
        raise OutOfBandError(
            f"target {target_nu} GHz outside achievable band "
            f"[{nu_lo:.4f}, {nu_hi:.4f}] GHz"
        )
    # nu01 decreases with phi on [0, 0.5)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        nu_mid = nu01(p, mid)
        if abs(nu_mid - target_nu) < tol:
            return mid
        if nu_mid > target_nu:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
