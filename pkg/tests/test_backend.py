"""Parity between the compiled stepper extension and the numpy fallback."""

import numpy as np
import pytest

from mmqed import _stepper_py
from mmqed.backend import BACKEND

try:
    from mmqed import _stepper
except ImportError:
    _stepper = None

needs_compiled = pytest.mark.skipif(_stepper is None,
                                    reason="compiled stepper not built")


def _inputs(dim=9, nsteps=40, seed=0):
    rng = np.random.default_rng(seed)
    h = rng.normal(size=(dim, dim))
    h_static = ((h + h.T) / 2).astype(complex)
    d1 = rng.integers(0, 2, size=dim).astype(float)
    d2 = rng.integers(0, 2, size=dim).astype(float)
    f1 = 7.0 + 0.1 * rng.normal(size=nsteps)
    f2 = 5.0 + 0.1 * rng.normal(size=nsteps)
    return h_static, d1, d2, f1, f2


@needs_compiled
def test_step_closed_parity():
    h_static, d1, d2, f1, f2 = _inputs()
    rng = np.random.default_rng(1)
    psi = rng.normal(size=9) + 1j * rng.normal(size=9)
    psi /= np.linalg.norm(psi)
    a = _stepper_py.step_closed(h_static, d1, d2, f1, f2, 0.01, psi.copy())
    b = _stepper.step_closed(h_static, d1, d2, f1, f2, 0.01, psi.copy())
    assert np.max(np.abs(a - b)) < 1e-12


@needs_compiled
def test_step_open_parity():
    h_static, d1, d2, f1, f2 = _inputs(dim=6, nsteps=25, seed=2)
    rng = np.random.default_rng(3)
    psi = rng.normal(size=6) + 1j * rng.normal(size=6)
    psi /= np.linalg.norm(psi)
    rho = np.outer(psi, psi.conj())
    # amplitude-damping ladders are real
    low = np.zeros((2, 6, 6))
    low[0, 0, 3] = 0.02
    low[1, 1, 4] = 0.03
    anticomm = 0.5 * sum(l.T @ l for l in low)
    a = _stepper_py.step_open(h_static, d1, d2, f1, f2, 0.01, rho.copy(),
                              low, anticomm)
    b = _stepper.step_open(h_static, d1, d2, f1, f2, 0.01, rho.copy(),
                           low, anticomm)
    assert np.max(np.abs(a - b)) < 1e-12


def test_apply_damping_trace_and_positivity():
    rng = np.random.default_rng(4)
    psi = rng.normal(size=5) + 1j * rng.normal(size=5)
    psi /= np.linalg.norm(psi)
    rho = np.outer(psi, psi.conj())
    low = np.zeros((1, 5, 5))
    low[0, 0, 2] = 0.05
    anticomm = 0.5 * low[0].T @ low[0]
    out = _stepper_py.apply_damping(rho.copy(), 0.02, low, anticomm)
    assert abs(np.trace(out).real - 1.0) < 1e-12
    assert np.min(np.linalg.eigvalsh(out)) > -1e-15


def test_backend_selection_reported():
    assert BACKEND in ("compiled", "python")
