"""Piecewise-linear frequency schedules and their propagation.

A schedule holds, per qubit, contiguous linear frequency segments covering
[0, T], plus instantaneous ideal microwave rotations.  Propagation walks the
timeline interval by interval; on stretches where both qubit frequencies are
constant the exponential is taken in one exact step (or with a cached
propagator for open evolution), otherwise midpoint-sampled steps of width dt
are used via the selected kernel backend.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import backend
from .basis import Basis, LabeledState
from .device import HamiltonianParts
from .linalg import TWO_PI
from .propagate import (DEFAULT_DT, NORM_DRIFT_LIMIT, PropagationError,
                        collapse_operators, detuning_std)


@dataclass(frozen=True)
class Segment:
    t0: float
    t1: float
    nu0: float
    nu1: float

    def frequency(self, t: float) -> float:
        if self.t1 == self.t0:
            return self.nu1
        x = (t - self.t0) / (self.t1 - self.t0)
        return self.nu0 + (self.nu1 - self.nu0) * x

    @property
    def slope(self) -> float:
        if self.t1 == self.t0:
            return 0.0
        return (self.nu1 - self.nu0) / (self.t1 - self.t0)


@dataclass(frozen=True)
class Rotation:
    """Instantaneous ideal rotation on one qubit about an equatorial axis.

    axis_phase is the azimuth of the rotation axis in that qubit's rotating
    frame (0 = x, pi/2 = y)."""
    time: float
    qubit: int
    angle: float
    axis_phase: float = 0.0


@dataclass
class PulseSchedule:
    segments: dict            # qubit (1, 2) -> list[Segment]
    rotations: list = field(default_factory=list)

    @property
    def total_time(self) -> float:
        return max(segs[-1].t1 for segs in self.segments.values())

    def frequency(self, qubit: int, t: float) -> float:
        segs = self.segments[qubit]
        for seg in segs:
            if seg.t0 <= t <= seg.t1:
                return seg.frequency(t)
        raise ValueError(f"time {t} outside schedule for qubit {qubit}")

    def validate(self):
        times = {q: segs[-1].t1 for q, segs in self.segments.items()}
        if len(set(times.values())) != 1:
            raise ValueError("per-qubit schedules span different totals")
        for q, segs in self.segments.items():
            if segs[0].t0 != 0.0:
                raise ValueError(f"qubit {q} schedule does not start at 0")
            for a, b in zip(segs, segs[1:]):
                if abs(a.t1 - b.t0) > 1e-12:
                    raise ValueError(f"qubit {q} segments not contiguous at {a.t1}")
                if b.t1 < b.t0:
                    raise ValueError("segment with negative duration")
        for rot in self.rotations:
            if not 0.0 <= rot.time <= self.total_time + 1e-12:
                raise ValueError("rotation outside the schedule span")
        return self

    def idle_frequency(self, qubit: int) -> float:
        return self.segments[qubit][0].nu0

    def frame_phase(self, qubit: int, t: float) -> float:
        """Accumulated rotating-frame phase 2*pi*nu_idle*t of a qubit."""
        return TWO_PI * self.idle_frequency(qubit) * t

    def reversed(self) -> "PulseSchedule":
        """Time-reversed schedule (rotations reversed too, angles negated)."""
        total = self.total_time
        segs = {
            q: [Segment(total - s.t1, total - s.t0, s.nu1, s.nu0)
                for s in reversed(slist)]
            for q, slist in self.segments.items()
        }
        rots = [Rotation(total - r.time, r.qubit, -r.angle, r.axis_phase)
                for r in reversed(self.rotations)]
        return PulseSchedule(segs, rots)


class ScheduleBuilder:
    """Builds one qubit's contiguous segment list."""

    def __init__(self, start_nu: float):
        self.segs: list = []
        self._t = 0.0
        self._nu = start_nu

    def hold(self, duration: float):
        if duration > 0:
            self.segs.append(Segment(self._t, self._t + duration, self._nu, self._nu))
            self._t += duration
        return self

    def ramp(self, duration: float, nu_to: float):
        if duration <= 0:
            raise ValueError("ramp duration must be positive")
        self.segs.append(Segment(self._t, self._t + duration, self._nu, nu_to))
        self._t += duration
        self._nu = nu_to
        return self

    def hold_until(self, t_end: float):
        return self.hold(t_end - self._t)

    def smooth_path(self, durations, nus, pieces_per_ns: float = 2.0):
        """C1-smooth monotone flux path through waypoints, with zero slope
        at both ends, discretized into short linear segments.

        durations[k] is the time from waypoint k to k+1; nus lists the
        waypoint frequencies after the current one.  Slope kinks at segment
        joints excite diabatic transitions near small gaps, so ramps that
        pass near avoided crossings should use this instead of ramp()."""
        from scipy.interpolate import CubicHermiteSpline, PchipInterpolator
        times = np.concatenate([[0.0], np.cumsum(durations)])
        points = np.concatenate([[self._nu], nus])
        pchip = PchipInterpolator(times, points)
        slopes = pchip.derivative()(times)
        slopes[0] = slopes[-1] = 0.0  # join holds without a kink
        interp = CubicHermiteSpline(times, points, slopes)
        total = times[-1]
        n = max(4, int(round(total * pieces_per_ns)))
        ts = np.linspace(0.0, total, n + 1)
        vals = interp(ts)
        vals[0], vals[-1] = points[0], points[-1]
        for k in range(n):
            if ts[k + 1] - ts[k] <= 0:
                continue
            if vals[k + 1] == vals[k]:
                self.hold(ts[k + 1] - ts[k])
            else:
                self.ramp(ts[k + 1] - ts[k], float(vals[k + 1]))
        return self

    @property
    def time(self) -> float:
        return self._t


def constant_schedule(nu1: float, nu2: float, duration: float) -> PulseSchedule:
    return PulseSchedule({
        1: [Segment(0.0, duration, nu1, nu1)],
        2: [Segment(0.0, duration, nu2, nu2)],
    })


def rotation_operator(basis: Basis, qubit: int, angle: float,
                      axis_phase: float) -> np.ndarray:
    """Ideal rotation acting on qubit levels 0 and 1 (identity on level 2)."""
    dim = basis.dim
    pos = qubit - 1
    op = np.eye(dim, dtype=complex)
    c = np.cos(angle / 2.0)
    s = np.sin(angle / 2.0)
    for i, lab in enumerate(basis.labels):
        if lab[pos] == 0:
            tgt = list(lab)
            tgt[pos] = 1
            j = basis.index.get(tuple(tgt))
            if j is None:
                continue  # partner outside the excitation cap
            op[i, i] = c
            op[j, j] = c
            op[j, i] = -1j * s * np.exp(-1j * axis_phase)
            op[i, j] = -1j * s * np.exp(1j * axis_phase)
    return op


def _intervals(schedule: PulseSchedule):
    """Timeline split at every segment boundary and rotation time."""
    cuts = {0.0, schedule.total_time}
    for segs in schedule.segments.values():
        for s in segs:
            cuts.add(s.t0)
            cuts.add(s.t1)
    for r in schedule.rotations:
        cuts.add(r.time)
    times = sorted(cuts)
    return [(a, b) for a, b in zip(times, times[1:]) if b - a > 1e-12]


def _midpoint_samples(schedule: PulseSchedule, a: float, b: float, dt: float,
                      delta=(0.0, 0.0)):
    """Midpoint frequency samples for [a, b]; one step when both constant."""
    f1a = schedule.frequency(1, a + 1e-12)
    f1b = schedule.frequency(1, b - 1e-12)
    f2a = schedule.frequency(2, a + 1e-12)
    f2b = schedule.frequency(2, b - 1e-12)
    constant = abs(f1b - f1a) < 1e-15 and abs(f2b - f2a) < 1e-15
    n = 1 if constant else max(1, int(round((b - a) / dt)))
    step = (b - a) / n
    mid = a + (np.arange(n) + 0.5) * step
    if constant:
        f1 = np.full(1, f1a + delta[0])
        f2 = np.full(1, f2a + delta[1])
    else:
        x1 = (mid - a) / (b - a)
        f1 = f1a + (f1b - f1a) * x1 + delta[0]
        f2 = f2a + (f2b - f2a) * x1 + delta[1]
    return f1, f2, step, constant


def _active_block_end(basis: Basis, support: np.ndarray, tol: float = 1e-14) -> int:
    """Smallest block-aligned prefix length containing all support."""
    hits = np.flatnonzero(support > tol)
    if hits.size == 0:
        return basis.blocks[0].stop
    e_max = int(basis.exc[hits[-1]])
    return basis.blocks[e_max].stop


def evolve_schedule(parts: HamiltonianParts, schedule: PulseSchedule,
                    psi0: LabeledState, dt: float = DEFAULT_DT,
                    delta=(0.0, 0.0), check_norm: bool = True) -> LabeledState:
    """Closed-system propagation of a schedule, blockwise per excitation sector."""
    schedule.validate()
    basis = parts.basis
    amps = psi0.amplitudes.copy()
    rot_at = {}
    for r in schedule.rotations:
        rot_at.setdefault(round(r.time, 12), []).append(r)

    def apply_rotations(t):
        nonlocal amps
        for r in rot_at.get(round(t, 12), []):
            beta = r.axis_phase + schedule.frame_phase(r.qubit, r.time)
            amps = rotation_operator(basis, r.qubit, r.angle, beta) @ amps

    apply_rotations(0.0)
    for a, b in _intervals(schedule):
        f1, f2, step, _ = _midpoint_samples(schedule, a, b, dt, delta)
        for e, sl in basis.blocks.items():
            seg = amps[sl]
            if np.max(np.abs(seg)) < 1e-14 or e == 0:
                continue  # empty sector, or the zero-excitation singlet (E=0)
            h0, d1, d2, _ = parts.block(e)
            amps[sl] = backend.step_closed(h0, d1, d2, f1, f2, step, seg)
        apply_rotations(b)

    if check_norm:
        drift = abs(np.linalg.norm(amps) - 1.0)
        if drift > NORM_DRIFT_LIMIT:
            raise PropagationError(
                f"norm drift {drift:.3e} exceeds {NORM_DRIFT_LIMIT}")
    return LabeledState(amps, basis)


def evolve_schedule_open(parts: HamiltonianParts, schedule: PulseSchedule,
                         rho0: np.ndarray, t1_us=(np.inf, np.inf),
                         sigma_ns=(np.inf, np.inf), realizations: int = 1,
                         dt: float = DEFAULT_DT, seed: int = 0,
                         threads: int = 1) -> np.ndarray:
    """Open-system schedule propagation averaged over noise realizations.

    Amplitude damping uses a first-order Lindblad splitting between unitary
    steps; dephasing enters as quasi-static Gaussian qubit detunings drawn
    once per realization (seeded deterministically by realization index).
    """
    if realizations < 1:
        raise ValueError("realizations must be >= 1")
    schedule.validate()
    basis = parts.basis
    lowers, anticomm = collapse_operators(basis, t1_us)
    stds = detuning_std(sigma_ns)

    def one_realization(r: int) -> np.ndarray:
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(r,)))
        delta = tuple(rng.normal(0.0, 1.0, size=2) * stds)
        return _evolve_open_single(parts, schedule, rho0, lowers, anticomm,
                                   delta, dt)

    if threads > 1 and realizations > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one_realization, range(realizations)))
        accum = sum(results)
    else:
        accum = np.zeros_like(rho0, dtype=complex)
        for r in range(realizations):
            accum += one_realization(r)
    rho = accum / realizations
    trace_drift = abs(np.trace(rho).real - 1.0)
    if trace_drift > 1e-6:
        raise PropagationError(f"trace drift {trace_drift:.3e}")
    return rho


def _evolve_open_single(parts, schedule, rho0, lowers, anticomm, delta, dt):
    basis = parts.basis
    rho = np.array(rho0, dtype=complex)
    rot_at = {}
    for r in schedule.rotations:
        rot_at.setdefault(round(r.time, 12), []).append(r)

    def apply_rotations(t):
        nonlocal rho
        for r in rot_at.get(round(t, 12), []):
            beta = r.axis_phase + schedule.frame_phase(r.qubit, r.time)
            op = rotation_operator(basis, r.qubit, r.angle, beta)
            rho = op @ rho @ op.conj().T

    apply_rotations(0.0)
    for a, b in _intervals(schedule):
        # restrict work to the populated excitation prefix; damping only
        # lowers excitation and the unitary conserves it
        end = _active_block_end(basis, np.abs(np.diag(rho)))
        sl = slice(0, end)
        sub = rho[sl, sl].copy()
        h0 = parts.static[sl, sl]
        d1, d2 = parts.d1[sl], parts.d2[sl]
        low_sub = lowers[:, sl, sl]
        anti_sub = anticomm[sl, sl]
        f1, f2, step, constant = _midpoint_samples(schedule, a, b, dt, delta)
        if constant:
            n_sub = max(1, int(round((b - a) / dt)))
            sub = _open_constant(h0, d1, d2, f1[0], f2[0],
                                 (b - a) / n_sub, n_sub, sub, low_sub, anti_sub)
        else:
            sub = backend.step_open(h0, d1, d2, f1, f2, step, sub,
                                    low_sub, anti_sub)
        rho[sl, sl] = sub
        apply_rotations(b)
    return rho


def _open_constant(h0, d1, d2, f1, f2, step, n_sub, rho, lowers, anticomm):
    """Constant-Hamiltonian stretch: cache the one-step propagator."""
    h = h0.copy()
    idx = np.arange(h.shape[0])
    h[idx, idx] += f1 * d1 + f2 * d2
    w, v = np.linalg.eigh(h)
    u = (v * np.exp(-1j * TWO_PI * w * step)) @ v.conj().T
    uh = u.conj().T
    for _ in range(n_sub):
        rho = u @ rho @ uh
        rho = backend.apply_damping(rho, step, lowers, anticomm)
    return rho
