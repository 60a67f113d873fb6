"""State and density-matrix propagation.

Integration is per-step exact exponentiation of the midpoint-sampled
Hamiltonian: eigendecompose, exponentiate the eigenvalues, apply.  Every step
is exactly unitary, so norm conservation costs nothing.  Open-system
evolution interleaves a first-order amplitude-damping update between unitary
steps and averages quasi-static Gaussian qubit detunings over realizations.
"""

from __future__ import annotations

import numpy as np

from . import backend
from .basis import Basis, LabeledState
from .linalg import TWO_PI, check_hermitian

DEFAULT_DT = 0.01  # ns; max relevant frequency is ~9 GHz

NORM_DRIFT_LIMIT = 1e-6


class PropagationError(RuntimeError):
    """Norm drift or contract violation during propagation."""


def _n_steps(duration: float, dt: float) -> int:
    return max(1, int(round(duration / dt)))


def propagate(hamiltonian_of_t, psi0: LabeledState, t_span, dt: float = DEFAULT_DT,
              check_every: int = 200) -> LabeledState:
    """Evolve psi0 under a time-dependent Hamiltonian callable.

    t_span is (t0, t1) or a plain duration starting at 0.  Hermiticity of the
    sampled Hamiltonian is spot-checked; norm drift beyond 1e-6 is a hard
    failure (dt too large or a non-Hermitian Hamiltonian).
    """
    if np.isscalar(t_span):
        t0, t1 = 0.0, float(t_span)
    else:
        t0, t1 = map(float, t_span)
    if dt <= 0:
        raise ValueError("dt must be positive")
    n = _n_steps(t1 - t0, dt)
    step = (t1 - t0) / n
    amps = psi0.amplitudes.copy()
    for k in range(n):
        h = np.asarray(hamiltonian_of_t(t0 + (k + 0.5) * step), dtype=complex)
        if k % check_every == 0:
            check_hermitian(h, rtol=1e-9)
        w, v = np.linalg.eigh(h)
        amps = v @ (np.exp(-1j * TWO_PI * w * step) * (v.conj().T @ amps))
    drift = abs(np.linalg.norm(amps) - 1.0)
    if drift > NORM_DRIFT_LIMIT:
        raise PropagationError(f"norm drift {drift:.3e} exceeds {NORM_DRIFT_LIMIT}")
    return LabeledState(amps, psi0.basis)


def lowering_operator(basis: Basis, qubit: int) -> np.ndarray:
    """Qubit ladder lowering operator on the full occupation basis."""
    dim = basis.dim
    op = np.zeros((dim, dim), dtype=complex)
    pos = qubit - 1
    for i, lab in enumerate(basis.labels):
        if lab[pos] > 0:
            tgt = list(lab)
            tgt[pos] -= 1
            op[basis.index[tuple(tgt)], i] = np.sqrt(lab[pos])
    return op


def collapse_operators(basis: Basis, t1_us) -> tuple:
    """Amplitude-damping collapse operators (and their half anticommutator sum)
    for per-qubit lifetimes in microseconds."""
    lowers = []
    for qubit, t1 in zip((1, 2), t1_us):
        if np.isfinite(t1):
            if t1 <= 0:
                raise ValueError("T1 must be positive")
            rate = 1.0 / (t1 * 1000.0)  # per ns
            lowers.append(np.sqrt(rate) * lowering_operator(basis, qubit))
    if lowers:
        lowers = np.array(lowers)
        anticomm = 0.5 * sum(low.conj().T @ low for low in lowers)
    else:
        lowers = np.zeros((0, basis.dim, basis.dim), dtype=complex)
        anticomm = np.zeros((basis.dim, basis.dim), dtype=complex)
    return lowers, anticomm


def detuning_std(sigma_ns) -> np.ndarray:
    """Quasi-static frequency-noise std (GHz) per qubit from the Gaussian
    Ramsey envelope time sigma (ns): exp(-t^2/2 sigma^2) <-> 1/(2 pi sigma)."""
    out = []
    for s in sigma_ns:
        out.append(0.0 if not np.isfinite(s) else 1.0 / (TWO_PI * s))
    return np.array(out)


def propagate_open(hamiltonian_of_t, rho0: np.ndarray, basis: Basis, t_span,
                   t1_us=(np.inf, np.inf), sigma_ns=(np.inf, np.inf),
                   realizations: int = 1, dt: float = DEFAULT_DT,
                   seed: int = 0) -> np.ndarray:
    """Density-matrix evolution with per-qubit damping and quasi-static
    Gaussian detuning noise, averaged over realizations."""
    if realizations < 1:
        raise ValueError("realizations must be >= 1")
    if np.isscalar(t_span):
        t0, t1 = 0.0, float(t_span)
    else:
        t0, t1 = map(float, t_span)
    n = _n_steps(t1 - t0, dt)
    step = (t1 - t0) / n
    lowers, anticomm = collapse_operators(basis, t1_us)
    stds = detuning_std(sigma_ns)
    d1 = basis.qubit_level_vector(1)
    d2 = basis.qubit_level_vector(2)
    diag = np.arange(basis.dim)

    accum = np.zeros_like(rho0, dtype=complex)
    for r in range(realizations):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(r,)))
        delta = rng.normal(0.0, 1.0, size=2) * stds
        rho = np.array(rho0, dtype=complex)
        for k in range(n):
            h = np.array(hamiltonian_of_t(t0 + (k + 0.5) * step), dtype=complex)
            h[diag, diag] += delta[0] * d1 + delta[1] * d2
            w, v = np.linalg.eigh(h)
            u = (v * np.exp(-1j * TWO_PI * w * step)) @ v.conj().T
            rho = u @ rho @ u.conj().T
            rho = backend.apply_damping(rho, step, lowers, anticomm)
        accum += rho
    return accum / realizations
