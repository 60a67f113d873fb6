"""Pure-numpy propagation kernels.

These mirror the compiled kernels in ``_stepper.pyx`` exactly; the backend
module picks whichever is available.  Both kernels advance through a
pre-sampled list of midpoint Hamiltonians of the form

    H_k = h_static + diag(f1[k] * d1 + f2[k] * d2)

and apply the exact exponential of each midpoint-sampled Hamiltonian, so each
step is exactly unitary.
"""

from __future__ import annotations

import numpy as np

from .linalg import TWO_PI


def step_closed(h_static, d1, d2, f1, f2, dt, psi):
    """Advance a state vector through len(f1) midpoint-exponential steps."""
    h = np.empty_like(h_static)
    diag = np.arange(h_static.shape[0])
    for k in range(len(f1)):
        np.copyto(h, h_static)
        h[diag, diag] += f1[k] * d1 + f2[k] * d2
        w, v = np.linalg.eigh(h)
        psi = v @ (np.exp(-1j * TWO_PI * w * dt) * (v.conj().T @ psi))
    return psi


def step_open(h_static, d1, d2, f1, f2, dt, rho, lowers, anticomm):
    """Advance a density matrix: unitary midpoint step, then a first-order
    amplitude-damping update.

    lowers: stacked collapse operators L_j (already scaled by sqrt(rate));
    anticomm: precomputed (1/2) sum_j L_j† L_j.
    """
    h = np.empty_like(h_static)
    diag = np.arange(h_static.shape[0])
    for k in range(len(f1)):
        np.copyto(h, h_static)
        h[diag, diag] += f1[k] * d1 + f2[k] * d2
        w, v = np.linalg.eigh(h)
        u = (v * np.exp(-1j * TWO_PI * w * dt)) @ v.conj().T
        rho = u @ rho @ u.conj().T
        rho = apply_damping(rho, dt, lowers, anticomm)
    return rho


def apply_damping(rho, dt, lowers, anticomm):
    """First-order damping update in Kraus form.

    K0 = 1 - dt*S with S = (1/2) sum L†L, K1_j = sqrt(dt) L_j: same O(dt)
    Lindblad generator as the plain splitting, but completely positive at
    any step size (the dt^2 S rho S term keeps eigenvalues >= 0).  The
    O((dt/T1)^2) trace growth of the unnormalized map is renormalized away,
    so the step is trace-preserving as well."""
    if len(lowers) == 0:
        return rho
    t_in = np.trace(rho).real
    delta = -(anticomm @ rho + rho @ anticomm)
    for low in lowers:
        delta += low @ rho @ low.conj().T
    out = rho + dt * delta + (dt * dt) * (anticomm @ rho @ anticomm)
    return out * (t_in / np.trace(out).real)
