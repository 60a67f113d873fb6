"""Multimode cavity QED simulator: two flux-tunable qubits coupled through an
n-mode resonator filter."""

__version__ = "0.1.0"

from .backend import BACKEND
from .basis import Basis, LabeledState, build_basis
from .device import DeviceParams, reference_device

__all__ = [
    "BACKEND",
    "Basis",
    "LabeledState",
    "build_basis",
    "DeviceParams",
    "reference_device",
    "__version__",
]
