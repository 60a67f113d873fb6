"""Adiabatic controlled-Z gate: schedule construction, conditional-phase
extraction, calibration, and the Bell-state experiment.

The gate parks the qubit-1 excitation in the filter as a photon, brings
qubit 2 just below the lowest filter mode where the photon-conditioned
shift is largest, holds for the phase-accumulation time, and reverses.
Single-qubit phases are cancelled with virtual-Z bookkeeping.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from .device import DeviceParams, filter_normal_modes, hamiltonian_parts
from .dynamics import LOAD_START_NU, LOAD_TOP_NU, Q2_PARK_NU
from .propagate import DEFAULT_DT
from .basis import LabeledState
from .linalg import TWO_PI
from .schedule import (PulseSchedule, ScheduleBuilder, evolve_schedule,
                       evolve_schedule_open)
from .tomography import (bell_fidelity, concurrence, reconstruct_state,
                         simulate_measurements, state_fidelity)

CZ_IDEAL = np.diag([1.0, 1.0, 1.0, -1.0]).astype(complex)

# computational label order |q1 q2> = gg, ge, eg, ee
def _comp_labels(n_modes):
    zeros = (0,) * n_modes
    return [(0, 0) + zeros, (0, 1) + zeros, (1, 0) + zeros, (1, 1) + zeros]


def wrap_phase(phi: float) -> float:
    """Wrap to (-pi, pi]."""
    out = (phi + np.pi) % (2.0 * np.pi) - np.pi
    return np.pi if out == -np.pi else out


class LeakageError(RuntimeError):
    """Too much population left the computational subspace for the phase
    of the returning amplitude to mean anything."""


class CalibrationError(RuntimeError):
    pass


@dataclass(frozen=True)
class CzSchedule:
    """Flux schedule realizing the controlled-Z.

    Ramps are C1-smooth with a slow section across the band-crossing
    region [slow_lo, slow_hi]; kinked ramps shed population at the
    avoided crossings."""

    nu_int: float = 6.85          # qubit-2 interaction frequency, GHz
    t_int: float = 20.0           # interaction hold, ns
    load_ramp: float = 30.0       # qubit-1 up-ramp through the band, ns
    retrieve_ramp: float = 30.0   # qubit-1 down-ramp, ns
    q2_ramp: float = 15.0         # qubit-2 rise/fall, ns
    q1_idle: float = 6.2
    q1_top: float = LOAD_TOP_NU
    q2_idle: float = Q2_PARK_NU
    q2_knee: float = 6.4          # end of qubit 2's fast approach, GHz
    slow_lo: float = 6.95         # slow section of the band traversal
    slow_hi: float = 7.35
    slow_frac: float = 0.5        # fraction of the ramp spent there
    vz1: float = 0.0              # virtual-Z corrections, rad
    vz2: float = 0.0

    @property
    def total_time(self) -> float:
        return self.load_ramp + 2 * self.q2_ramp + self.t_int + self.retrieve_ramp

    def validate(self, p: DeviceParams):
        lowest_mode = filter_normal_modes(p)[0][0]
        if not self.nu_int < lowest_mode:
            raise ValueError(
                f"interaction frequency {self.nu_int} GHz must sit below the "
                f"lowest filter mode ({lowest_mode:.4f} GHz)")
        if not self.q1_idle < self.slow_lo < self.slow_hi < self.q1_top:
            raise ValueError("band traversal waypoints out of order")
        for name in ("t_int", "load_ramp", "retrieve_ramp", "q2_ramp"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    def _band_times(self, total):
        d_lo = self.slow_lo - self.q1_idle
        d_hi = self.q1_top - self.slow_hi
        t_slow = self.slow_frac * total
        t_fast = total - t_slow
        return (t_fast * d_lo / (d_lo + d_hi), t_slow,
                t_fast * d_hi / (d_lo + d_hi))

    def pulse_schedule(self) -> PulseSchedule:
        b1 = ScheduleBuilder(self.q1_idle)
        b2 = ScheduleBuilder(self.q2_idle)
        t1, ts, t2 = self._band_times(self.load_ramp)
        b1.smooth_path([t1, ts, t2], [self.slow_lo, self.slow_hi, self.q1_top])
        b2.hold(b1.time)
        b2.smooth_path([0.35 * self.q2_ramp, 0.65 * self.q2_ramp],
                       [self.q2_knee, self.nu_int])
        b2.hold(self.t_int)
        b2.smooth_path([0.65 * self.q2_ramp, 0.35 * self.q2_ramp],
                       [self.q2_knee, self.q2_idle])
        b1.hold_until(b2.time)
        t1, ts, t2 = self._band_times(self.retrieve_ramp)
        b1.smooth_path([t2, ts, t1], [self.slow_hi, self.slow_lo, self.q1_idle])
        b2.hold_until(b1.time)
        return PulseSchedule({1: b1.segs, 2: b2.segs})

    def to_dict(self) -> dict:
        return {k: float(getattr(self, k)) for k in (
            "nu_int", "t_int", "load_ramp", "retrieve_ramp", "q2_ramp",
            "q1_idle", "q1_top", "q2_idle", "q2_knee", "slow_lo", "slow_hi",
            "slow_frac", "vz1", "vz2")} | {
            "total_time": float(self.total_time)}


@dataclass
class GateReport:
    phases: dict = field(default_factory=dict)       # 'gg' ... -> rad
    conditional_phase: float = 0.0                   # rad, in (-pi, pi]
    leakage: dict = field(default_factory=dict)      # per input
    exchange_leakage: float = 0.0                    # |<ge|U|eg>|^2
    avg_gate_fidelity: float = None
    bell_fidelity: float = None
    bell_phase: float = None
    concurrence_value: float = None
    total_time: float = None
    decoherence: bool = False
    realizations: int = 0
    shots: int = 0

    def to_dict(self) -> dict:
        out = {}
        for k, v in self.__dict__.items():
            if isinstance(v, dict):
                out[k] = {kk: float(vv) for kk, vv in v.items()}
            elif v is None or isinstance(v, bool):
                out[k] = v
            else:
                out[k] = float(v)
        return out


def gate_device(p: DeviceParams) -> DeviceParams:
    """Gate simulations default to 3-level qubits (leakage structure is
    real) and need at most two excitations."""
    return p.with_(qubit_levels=3, excitation_cap=min(p.excitation_cap, 2),
                   photon_cutoff=min(p.photon_cutoff, 2))


def dressed_computational(parts, p: DeviceParams, nu1: float, nu2: float):
    """Columns: dressed eigenstates at the idle point that connect to the
    four bare computational labels, plus their energies.

    The idle qubits hybridize weakly with the filter; the physical qubit
    (what a resonant drive addresses) is the dressed state, so gate inputs
    and outputs are defined in this basis."""
    basis = parts.basis
    labels = _comp_labels(p.n_modes)
    cols = np.zeros((basis.dim, 4), dtype=complex)
    energies = np.zeros(4)
    cols[basis.index[labels[0]], 0] = 1.0   # vacuum, zero energy
    for j in (1, 2, 3):
        i_full = basis.index[labels[j]]
        sl = basis.block_indices(int(basis.exc[i_full]))
        h = parts.hamiltonian(nu1, nu2)[sl, sl]
        w, v = np.linalg.eigh(h)
        i_loc = i_full - sl.start
        k = int(np.argmax(np.abs(v[i_loc, :]) ** 2))
        if np.abs(v[i_loc, k]) ** 2 < 0.5:
            raise ValueError(
                f"no dressed state with majority weight on {labels[j]}; "
                "idle point sits inside an avoided crossing")
        vec = v[:, k] * np.exp(-1j * np.angle(v[i_loc, k]))
        cols[sl, j] = vec
        energies[j] = w[k]
    return cols, energies


def computational_matrix(p: DeviceParams, s: CzSchedule,
                         dt: float = DEFAULT_DT):
    """4x4 matrix M[out, in] = <out|U|in> over the dressed computational
    states, in their idle rotating frame, plus per-input leakage."""
    s.validate(p)
    parts = hamiltonian_parts(p)
    basis = parts.basis
    sched = s.pulse_schedule()
    cols, energies = dressed_computational(parts, p, s.q1_idle, s.q2_idle)
    total = sched.total_time
    # undo the idle dynamical phase of each output state
    frame = np.exp(1j * TWO_PI * energies * total)
    m = np.zeros((4, 4), dtype=complex)
    leakage = {}
    names = ("gg", "ge", "eg", "ee")
    for j in range(4):
        if j == 0:
            m[0, 0] = 1.0       # vacuum input does not evolve (zero energy)
            leakage["gg"] = 0.0
            continue
        psi = evolve_schedule(parts, sched,
                              LabeledState(cols[:, j].copy(), basis), dt=dt)
        amps = (cols.conj().T @ psi.amplitudes) * frame
        m[:, j] = amps
        leakage[names[j]] = float(1.0 - np.sum(np.abs(amps) ** 2))
    return m, leakage


def _apply_vz(m: np.ndarray, vz1: float, vz2: float) -> np.ndarray:
    corr = np.exp(1j * np.array([0.0, vz2, vz1, vz1 + vz2]))
    return corr[:, None] * m


def average_gate_fidelity(m: np.ndarray, target: np.ndarray = None) -> float:
    """Average fidelity of the (possibly leaky) 4x4 map vs a target unitary."""
    if target is None:
        target = CZ_IDEAL
    d = 4
    tr_mm = np.real(np.trace(m.conj().T @ m))
    tr_um = np.abs(np.trace(target.conj().T @ m)) ** 2
    return float((tr_mm + tr_um) / (d * (d + 1)))


def conditional_phase(p: DeviceParams, s: CzSchedule, dt: float = DEFAULT_DT,
                      leakage_limit: float = 0.05) -> GateReport:
    """Phases of the four computational states after the schedule and the
    conditional combination phi_ee + phi_gg - phi_eg - phi_ge."""
    m, leakage = computational_matrix(p, s, dt=dt)
    worst = max(leakage.values())
    if worst > leakage_limit:
        raise LeakageError(
            f"computational leakage {worst:.3f} exceeds {leakage_limit}; "
            "phase extraction unreliable")
    phases = {name: float(np.angle(m[k, k]))
              for k, name in enumerate(("gg", "ge", "eg", "ee"))}
    phi_c = wrap_phase(phases["ee"] + phases["gg"]
                       - phases["eg"] - phases["ge"])
    return GateReport(
        phases=phases, conditional_phase=float(phi_c), leakage=leakage,
        exchange_leakage=float(abs(m[1, 2]) ** 2 + abs(m[2, 1]) ** 2) / 2.0,
        total_time=s.total_time)


def conditional_phase_integral(p: DeviceParams, s: CzSchedule,
                               samples: int = 2000) -> float:
    """Quasi-static oracle: -2*pi * integral of E_ee+E_gg-E_eg-E_ge along
    the schedule, following each computational branch adiabatically."""
    parts = hamiltonian_parts(p)
    basis = parts.basis
    sched = s.pulse_schedule()
    total = sched.total_time
    ts = np.linspace(0.0, total, samples)
    cols, idle_energies = dressed_computational(parts, p, s.q1_idle,
                                                s.q2_idle)
    labels = _comp_labels(p.n_modes)
    acc = 0.0
    for j in (1, 2, 3):
        lab = labels[j]
        sl = basis.block_indices(int(basis.exc[basis.index[lab]]))
        h0 = parts.static[sl, sl]
        d1, d2 = parts.d1[sl], parts.d2[sl]
        idx = np.arange(h0.shape[0])
        vec = cols[sl, j].copy()
        energies = np.empty(samples)
        for i, t in enumerate(ts):
            h = h0.copy()
            h[idx, idx] += (sched.frequency(1, t) * d1
                            + sched.frequency(2, t) * d2)
            w, v = np.linalg.eigh(h)
            k = int(np.argmax(np.abs(v.conj().T @ vec) ** 2))
            vec = v[:, k]
            energies[i] = w[k] - idle_energies[j]
        sign = 1.0 if j == 3 else -1.0
        acc += sign * np.trapezoid(energies, ts)
    return wrap_phase(-2.0 * np.pi * acc)


def _solve_duration(p, s, dt, target=np.pi, tol=0.005, max_iter=8,
                    t_bounds=(2.0, 120.0)):
    """Newton iteration on the hold time for a pi conditional phase."""
    probe = 3.0
    r0 = conditional_phase(p, s, dt=dt)
    r1 = conditional_phase(p, replace(s, t_int=s.t_int + probe), dt=dt)
    rate = wrap_phase(r1.conditional_phase - r0.conditional_phase) / probe
    if abs(rate) < 1e-4:
        raise CalibrationError(
            f"conditional-phase rate {rate:.2e} rad/ns too small at "
            f"nu_int={s.nu_int}; pi is out of reach "
            f"(phase now {r0.conditional_phase:+.3f} rad)")
    t = s.t_int
    report = r0
    for _ in range(max_iter):
        err = wrap_phase(report.conditional_phase - target)
        if abs(err) <= tol:
            return replace(s, t_int=t), report
        t = t - err / rate
        if not t_bounds[0] <= t <= t_bounds[1]:
            # wrap into range using the 2*pi/rate periodicity
            period = abs(2.0 * np.pi / rate)
            while t < t_bounds[0]:
                t += period
            while t > t_bounds[1]:
                t -= period
            if not t_bounds[0] <= t <= t_bounds[1]:
                raise CalibrationError(
                    f"pi phase unreachable within hold bounds {t_bounds}; "
                    f"achievable range sweeps {rate:.4f} rad/ns")
        report = conditional_phase(p, replace(s, t_int=t), dt=dt)
    raise CalibrationError(
        f"duration solve stalled at phase {report.conditional_phase:+.4f}")


def _golden_section(f, lo, hi, tol, max_iter=10):
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a < tol:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return (c, fc) if fc < fd else (d, fd)


def calibrate_cz(p: DeviceParams, initial: CzSchedule = None,
                 dt: float = DEFAULT_DT, refine: bool = True,
                 fidelity_tol: float = 1e-4) -> CzSchedule:
    """Three-stage calibration: solve the hold time for a pi conditional
    phase, cancel single-qubit phases with virtual-Z, then coordinate
    descent (golden section) over interaction frequency and ramp times
    maximizing average gate fidelity vs the ideal controlled-Z."""
    p = gate_device(p)
    if initial is None:
        initial = CzSchedule()
    initial.validate(p)

    cache = {}

    def solved(params):
        # params = (nu_int, load_ramp, retrieve_ramp)
        if params not in cache:
            s = replace(initial, nu_int=params[0], load_ramp=params[1],
                        retrieve_ramp=params[2])
            try:
                s, report = _solve_duration(p, s, dt)
            except (CalibrationError, LeakageError) as err:
                cache[params] = (None, 0.0, err)
                return cache[params]
            m, _ = computational_matrix(p, s, dt=dt)
            vz1 = -wrap_phase(np.angle(m[2, 2]) - np.angle(m[0, 0]))
            vz2 = -wrap_phase(np.angle(m[1, 1]) - np.angle(m[0, 0]))
            s = replace(s, vz1=vz1, vz2=vz2)
            fid = average_gate_fidelity(_apply_vz(m, vz1, vz2))
            cache[params] = (s, fid, None)
        return cache[params]

    x = (initial.nu_int, initial.load_ramp, initial.retrieve_ramp)
    best_s, best_f, err = solved(x)
    if best_s is None:
        raise CalibrationError(f"initial schedule not calibratable: {err}")

    if refine:
        lowest_mode = filter_normal_modes(p)[0][0]
        bounds = [(lowest_mode - 0.35, lowest_mode - 0.02),
                  (15.0, 35.0), (15.0, 35.0)]
        tols = (0.005, 0.5, 0.5)
        for _ in range(3):
            f_before = best_f
            for k in range(3):
                def neg(v, k=k):
                    params = tuple(v if i == k else x[i] for i in range(3))
                    return -solved(params)[1]
                v_best, nf = _golden_section(neg, *bounds[k], tols[k],
                                             max_iter=8)
                if -nf > best_f:
                    best_f = -nf
                    x = tuple(v_best if i == k else x[i] for i in range(3))
            if best_f - f_before < fidelity_tol:
                break
        best_s = solved(x)[0]
    return best_s


def _ry(angle: float) -> np.ndarray:
    c, s = np.cos(angle / 2.0), np.sin(angle / 2.0)
    return np.array([[c, -s], [s, c]], dtype=complex)


def bell_experiment(p: DeviceParams, s: CzSchedule, decoherence: bool = False,
                    shots: int = None, realizations: int = 400,
                    dt: float = DEFAULT_DT, seed: int = 0,
                    threads: int = 1) -> tuple:
    """Ry(pi/2) on both qubits, the CZ schedule, Ry(-pi/2) on qubit 2, then
    two-qubit tomography.  Returns (GateReport, 4x4 density matrix)."""
    p = gate_device(p)
    s.validate(p)
    parts = hamiltonian_parts(p)
    basis = parts.basis
    sched = s.pulse_schedule()
    total = sched.total_time
    cols, energies = dressed_computational(parts, p, s.q1_idle, s.q2_idle)
    # pi/2 preparation pulses drive the dressed qubits; build the
    # superposition directly in the dressed basis
    prep = np.kron(_ry(np.pi / 2.0), _ry(np.pi / 2.0))[:, 0]
    psi0 = cols @ prep
    if decoherence:
        rho_full = evolve_schedule_open(
            parts, sched, np.outer(psi0, psi0.conj()), t1_us=p.t1,
            sigma_ns=p.ramsey_sigma, realizations=realizations, dt=dt,
            seed=seed, threads=threads)
    else:
        psi = evolve_schedule(parts, sched, LabeledState(psi0, basis), dt=dt)
        rho_full = psi.density_matrix()
    rho = cols.conj().T @ rho_full @ cols
    leak = float(1.0 - np.real(np.trace(rho)))
    rho = rho / np.real(np.trace(rho))

    # idle-frame and virtual-Z phase corrections, then the final rotation
    frame = TWO_PI * energies * total
    vz = np.array([0.0, s.vz2, s.vz1, s.vz1 + s.vz2])
    corr = np.diag(np.exp(1j * (frame + vz)))
    post = np.kron(np.eye(2), _ry(-np.pi / 2.0))
    u = post @ corr
    rho = u @ rho @ u.conj().T

    report = GateReport(total_time=s.total_time, decoherence=decoherence,
                        realizations=realizations if decoherence else 0,
                        leakage={"bell": leak})
    if shots:
        settings = [(a, b) for a in "XYZ" for b in "XYZ"]
        counts = simulate_measurements(rho, settings, shots, seed=seed + 7919)
        rho_meas = reconstruct_state(counts)
        report.shots = shots
    else:
        rho_meas = rho
    fid, phi = bell_fidelity(rho_meas)
    report.bell_fidelity = float(fid)
    report.bell_phase = float(phi)
    report.concurrence_value = float(concurrence(rho_meas))
    return report, rho_meas


def write_gate_report(report: GateReport, schedule: CzSchedule, path):
    with open(path, "w") as fh:
        json.dump({"schedule": schedule.to_dict(),
                   "report": report.to_dict()}, fh, indent=2, sort_keys=True)
        fh.write("\n")
