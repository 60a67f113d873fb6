"""Compare the compiled stepper extension against the numpy fallback.

Run:  python benchmarks/bench_propagation.py
"""

import time

import numpy as np

from mmqed import _stepper_py
from mmqed.backend import BACKEND

try:
    from mmqed import _stepper
except ImportError:
    _stepper = None

from mmqed.basis import LabeledState
from mmqed.device import hamiltonian_parts, reference_device
from mmqed.dynamics import lz_ramp_schedule
from mmqed.gates import CzSchedule, gate_device
from mmqed.schedule import evolve_schedule, evolve_schedule_open


def _time(fn, repeats=3):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_raw_steps():
    """Tight loop over the stepper kernels themselves."""
    rng = np.random.default_rng(0)
    for dim in (5, 16, 34):
        h = rng.normal(size=(dim, dim))
        h_static = ((h + h.T) / 2).astype(complex)
        d1 = rng.integers(0, 2, size=dim).astype(float)
        d2 = rng.integers(0, 2, size=dim).astype(float)
        f1 = 7.0 + 0.1 * rng.normal(size=2000)
        f2 = 5.0 + 0.1 * rng.normal(size=2000)
        psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        psi /= np.linalg.norm(psi)
        t_py = _time(lambda: _stepper_py.step_closed(
            h_static, d1, d2, f1, f2, 0.01, psi.copy()))
        row = f"closed dim={dim:3d} 2000 steps: python {t_py*1e3:7.1f} ms"
        if _stepper is not None:
            t_c = _time(lambda: _stepper.step_closed(
                h_static, d1, d2, f1, f2, 0.01, psi.copy()))
            row += f"   compiled {t_c*1e3:7.1f} ms   speedup x{t_py/t_c:.1f}"
        print(row)


def bench_schedules():
    """Full experiment-level propagation through the selected backend."""
    import mmqed.backend as backend
    p = reference_device()
    parts = hamiltonian_parts(p)
    psi0 = parts.basis.state((1, 0, 0, 0, 0))
    sched = lz_ramp_schedule(25.0, 110.0, 6.2, 8.1)

    gp = gate_device(p)
    gparts = hamiltonian_parts(gp)
    cz = CzSchedule().pulse_schedule()
    rho0 = gparts.basis.state((1, 1, 0, 0, 0)).density_matrix()

    impls = [("python", _stepper_py)] + \
        ([("compiled", _stepper)] if _stepper is not None else [])
    times = {}
    for name, mod in impls:
        backend.step_closed = mod.step_closed
        backend.step_open = mod.step_open
        times[name, "closed"] = _time(
            lambda: evolve_schedule(parts, sched, psi0))
        times[name, "open"] = _time(
            lambda: evolve_schedule_open(gparts, cz, rho0,
                                         t1_us=(2.36, 2.14),
                                         sigma_ns=(312.0, 492.0),
                                         realizations=2))
    for kind in ("closed", "open"):
        row = f"{kind:6s} schedule: python {times['python', kind]*1e3:7.1f} ms"
        if ("compiled", kind) in times:
            t_c = times["compiled", kind]
            row += (f"   compiled {t_c*1e3:7.1f} ms   "
                    f"speedup x{times['python', kind]/t_c:.1f}")
        print(row)


if __name__ == "__main__":
    print(f"selected backend: {BACKEND}")
    bench_raw_steps()
    bench_schedules()
