"""Select the propagation kernel backend at import time.

The compiled Cython extension is used when it imported cleanly; otherwise the
pure-numpy fallback takes over.  Set MMQED_BACKEND=python or
MMQED_BACKEND=compiled to force a choice (forcing "compiled" raises if the
extension is missing).
"""

from __future__ import annotations

import os

from . import _stepper_py

_requested = os.environ.get("MMQED_BACKEND", "").strip().lower()

_compiled = None
if _requested != "python":
    try:
        from . import _stepper as _compiled  # type: ignore[attr-defined]
    except ImportError:
        _compiled = None
        if _requested == "compiled":
            raise ImportError(
                "MMQED_BACKEND=compiled but the mmqed._stepper extension is "
                "not built; run `pip install -e . --no-build-isolation`"
            )

if _compiled is not None:
    BACKEND = "compiled"
    step_closed = _compiled.step_closed
    step_open = _compiled.step_open
else:
    BACKEND = "python"
    step_closed = _stepper_py.step_closed
    step_open = _stepper_py.step_open

# The damping map is cheap and only used on constant-Hamiltonian stretches.
apply_damping = _stepper_py.apply_damping
