"""Two-qubit state tomography: simulated projective measurement in the nine
{X,Y,Z} x {X,Y,Z} settings, linear-inversion reconstruction with a PSD
projection, and entanglement metrics."""

from __future__ import annotations

import numpy as np

from .linalg import SIGMA_X, SIGMA_Y, SIGMA_Z

_PAULI = {"I": np.eye(2, dtype=complex), "X": SIGMA_X, "Y": SIGMA_Y,
          "Z": SIGMA_Z}
SETTINGS = tuple((a, b) for a in "XYZ" for b in "XYZ")
# outcome order per setting: (+,+), (+,-), (-,+), (-,-)
_OUTCOME_SIGNS = np.array([(1, 1), (1, -1), (-1, 1), (-1, -1)])


def _eigenbasis(axis: str) -> np.ndarray:
    """Columns: +1 and -1 eigenvectors of the Pauli operator."""
    w, v = np.linalg.eigh(_PAULI[axis])
    return v[:, ::-1]  # eigh sorts ascending; want (+, -)


def _setting_projectors(setting) -> np.ndarray:
    a, b = setting
    va, vb = _eigenbasis(a), _eigenbasis(b)
    projs = np.empty((4, 4, 4), dtype=complex)
    for k, (i, j) in enumerate(((0, 0), (0, 1), (1, 0), (1, 1))):
        vec = np.kron(va[:, i], vb[:, j])
        projs[k] = np.outer(vec, vec.conj())
    return projs


def outcome_probabilities(rho: np.ndarray, setting) -> np.ndarray:
    projs = _setting_projectors(setting)
    probs = np.real(np.einsum("kij,ji->k", projs, rho))
    probs = np.clip(probs, 0.0, None)
    return probs / probs.sum()


def simulate_measurements(rho: np.ndarray, settings, shots: int,
                          seed: int = 0) -> dict:
    """Multinomial counts of the four outcomes per setting."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    rng = np.random.default_rng(seed)
    counts = {}
    for setting in settings:
        probs = outcome_probabilities(rho, setting)
        counts[tuple(setting)] = rng.multinomial(shots, probs)
    return counts


class MissingSettingsError(ValueError):
    pass


def expectation_values(counts: dict) -> dict:
    """Pauli expectation values <sigma_i x sigma_j> from the counts table.

    Two-qubit correlators come from their own setting; single-qubit
    expectations are averaged over the three settings measuring that axis."""
    missing = [s for s in SETTINGS if tuple(s) not in counts]
    if missing:
        raise MissingSettingsError(
            "missing tomography settings: "
            + ", ".join("".join(s) for s in missing))
    ev = {("I", "I"): 1.0}
    for a, b in SETTINGS:
        c = np.asarray(counts[(a, b)], dtype=float)
        n = c.sum()
        ev[(a, b)] = float(c @ (_OUTCOME_SIGNS[:, 0] * _OUTCOME_SIGNS[:, 1]) / n)
    for a in "XYZ":
        vals = []
        for b in "XYZ":
            c = np.asarray(counts[(a, b)], dtype=float)
            vals.append(c @ _OUTCOME_SIGNS[:, 0] / c.sum())
        ev[(a, "I")] = float(np.mean(vals))
    for b in "XYZ":
        vals = []
        for a in "XYZ":
            c = np.asarray(counts[(a, b)], dtype=float)
            vals.append(c @ _OUTCOME_SIGNS[:, 1] / c.sum())
        ev[("I", b)] = float(np.mean(vals))
    return ev


def project_psd(rho: np.ndarray) -> np.ndarray:
    """Nearest physical state by eigenvalue clipping and renormalization."""
    rho = 0.5 * (rho + rho.conj().T)
    w, v = np.linalg.eigh(rho)
    w = np.clip(w, 0.0, None)
    w = w / w.sum()
    return (v * w) @ v.conj().T


def reconstruct_state(counts: dict) -> np.ndarray:
    """Linear inversion over the Pauli basis followed by PSD projection."""
    ev = expectation_values(counts)
    rho = np.zeros((4, 4), dtype=complex)
    for a in "IXYZ":
        for b in "IXYZ":
            rho += ev[(a, b)] * np.kron(_PAULI[a], _PAULI[b])
    return project_psd(rho / 4.0)


def state_fidelity(rho: np.ndarray, target: np.ndarray) -> float:
    """<psi|rho|psi> for a pure target state vector."""
    target = np.asarray(target, dtype=complex).ravel()
    target = target / np.linalg.norm(target)
    return float(np.real(target.conj() @ rho @ target))


def bell_fidelity(rho: np.ndarray):
    """Fidelity to (|gg> + e^{i phi}|ee>)/sqrt(2) maximized over phi.

    Returns (fidelity, optimal phi)."""
    f = 0.5 * np.real(rho[0, 0] + rho[3, 3]) + abs(rho[0, 3])
    phi = float(-np.angle(rho[0, 3])) if abs(rho[0, 3]) > 0 else 0.0
    return float(f), phi


def concurrence(rho: np.ndarray) -> float:
    """Wootters concurrence of a two-qubit density matrix.

    The lambda_i are the singular values of sqrt(rho) (sy x sy) sqrt(rho)*:
    with A that matrix, rho rho~ = A A^H up to similarity, and the SVD stays
    accurate for rank-deficient rho where the plain eigensolve of the
    non-Hermitian product loses digits."""
    yy = np.kron(SIGMA_Y, SIGMA_Y)
    w, v = np.linalg.eigh(rho)
    root = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T
    lam = np.linalg.svd(root @ yy @ root.conj(), compute_uv=False)
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def bootstrap(counts: dict, statistic, resamples: int = 200,
              seed: int = 0) -> dict:
    """Parametric bootstrap over the counts table.

    statistic: callable rho -> float, applied to each resampled
    reconstruction.  Returns mean, std, and the 2.5/97.5 percentiles."""
    rng = np.random.default_rng(seed)
    values = np.empty(resamples)
    freqs = {s: np.asarray(c, dtype=float) / np.sum(c)
             for s, c in counts.items()}
    shots = {s: int(np.sum(c)) for s, c in counts.items()}
    for r in range(resamples):
        resampled = {s: rng.multinomial(shots[s], freqs[s]) for s in counts}
        values[r] = statistic(reconstruct_state(resampled))
    return {"mean": float(values.mean()), "std": float(values.std(ddof=1)),
            "low": float(np.percentile(values, 2.5)),
            "high": float(np.percentile(values, 97.5))}
