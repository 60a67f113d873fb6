"""Dense complex linear algebra helpers shared by every module.

Units everywhere: h = 1, energies in GHz, times in ns, so a state with
energy E acquires phase exp(-i * 2*pi * E * t).
"""

from __future__ import annotations

import numpy as np

TWO_PI = 2.0 * np.pi

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)


class NonHermitianError(ValueError):
    """Raised when a matrix expected to be Hermitian is not."""


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Tensor product with the left factor outermost (standard ordering)."""
    return np.kron(np.asarray(a), np.asarray(b))


def hermiticity_defect(h: np.ndarray) -> float:
    """Relative norm of (h - h†), zero for exactly Hermitian input."""
    h = np.asarray(h)
    scale = np.linalg.norm(h)
    if scale == 0.0:
        return 0.0
    return np.linalg.norm(h - h.conj().T) / scale


def check_hermitian(h: np.ndarray, rtol: float = 1e-12) -> None:
    defect = hermiticity_defect(h)
    if defect > rtol:
        raise NonHermitianError(
            f"matrix is not Hermitian: ||h - h†|| / ||h|| = {defect:.3e}"
        )


def eig_hermitian(h: np.ndarray, rtol: float = 1e-9):
    """Eigenvalues (ascending) and eigenvector columns of a Hermitian matrix.

    Rejects non-Hermitian input with the defect norm in the message.
    """
    h = np.asarray(h, dtype=complex)
    check_hermitian(h, rtol=rtol)
    w, v = np.linalg.eigh(h)
    return w, v


def unitarity_defect(u: np.ndarray) -> float:
    u = np.asarray(u)
    return np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0]))
