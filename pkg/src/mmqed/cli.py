"""Command-line interface.

Every data-producing subcommand writes its artifacts plus a manifest.json
(config hash, seed, versions, backend, wall time) into --out, so runs are
reproducible and comparable.
"""

from __future__ import annotations

import json
import platform
import sys
import time
from pathlib import Path

import click
import numpy as np

from . import __version__
from .backend import BACKEND
from .config import (ConfigError, config_hash, device_from_config,
                     grid_from_config, load_config, transmons_from_config)
from .dynamics import lz_ramp_experiment, stark_ramsey
from .gates import (CzSchedule, bell_experiment, calibrate_cz,
                    conditional_phase, gate_device, write_gate_report)
from .spectroscopy import (eigen_sweep, exchange_scan, find_avoided_crossing,
                           write_exchange_csv)
from . import tomography as tomo


def _common(fn):
    fn = click.option("--config", "config_path", type=click.Path(exists=True),
                      default=None, help="TOML/JSON config file.")(fn)
    fn = click.option("--set", "overrides", multiple=True, metavar="KEY=VAL",
                      help="Dotted-path config override, repeatable.")(fn)
    fn = click.option("--seed", type=int, default=None,
                      help="Override run.seed.")(fn)
    fn = click.option("--threads", type=int, default=None,
                      help="Override run.threads.")(fn)
    fn = click.option("--out", "out_dir", type=click.Path(file_okay=False),
                      default="out", show_default=True,
                      help="Output directory for artifacts.")(fn)
    return fn


def _setup(config_path, overrides, seed, threads, out_dir):
    try:
        config = load_config(config_path, overrides)
    except ConfigError as err:
        raise click.ClickException(str(err))
    if seed is not None:
        config["run"]["seed"] = int(seed)
    if threads is not None:
        config["run"]["threads"] = int(threads)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return config, out


def _write_manifest(out: Path, command: str, config: dict, artifacts,
                    t0: float):
    manifest = {
        "command": command,
        "config_hash": config_hash(config),
        "config": config,
        "seed": config["run"]["seed"],
        "threads": config["run"]["threads"],
        "backend": BACKEND,
        "versions": {"mmqed": __version__, "numpy": np.__version__,
                     "python": platform.python_version()},
        "wall_time_s": round(time.perf_counter() - t0, 3),
        "artifacts": sorted(str(a.name) for a in artifacts),
    }
    path = out / "manifest.json"
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


@click.group()
@click.version_option(__version__)
def main():
    """Multimode circuit-QED simulator: spectra, photon shuttling, Stark
    spectroscopy, and a photon-mediated controlled-Z gate."""


@main.command()
@_common
def spectroscopy(config_path, overrides, seed, threads, out_dir):
    """Sweep a qubit frequency through the filter band and write the
    branch-tracked eigenvalue table plus the located avoided crossings."""
    config, out = _setup(config_path, overrides, seed, threads, out_dir)
    t0 = time.perf_counter()
    p = device_from_config(config)
    spec = config["spectroscopy"]
    grid = grid_from_config(spec["grid"])
    transmons = transmons_from_config(config)
    table = eigen_sweep(p, spec["axis"], grid, block=int(spec["block"]),
                        fixed_other=float(spec["fixed_other"]),
                        transmons=transmons)
    csv_path = out / "spectrum.csv"
    table.write_csv(csv_path)
    crossings = []
    nlev = table.energies.shape[1]
    for i in range(nlev - 1):
        try:
            center, gap = find_avoided_crossing(table, (i, i + 1))
        except ValueError:
            continue
        if gap < 0.3:
            crossings.append({"branches": [i, i + 1], "center_ghz": center,
                              "gap_ghz": gap})
            click.echo(f"crossing of branches {i},{i + 1}: center "
                       f"{center:.4f} GHz, gap {gap*1e3:.1f} MHz")
    crossings.sort(key=lambda c: c["center_ghz"])
    cross_path = out / "crossings.json"
    with open(cross_path, "w") as fh:
        json.dump(crossings, fh, indent=2)
        fh.write("\n")
    _write_manifest(out, "spectroscopy", config, [csv_path, cross_path], t0)


@main.command("exchange-scan")
@_common
def exchange_scan_cmd(config_path, overrides, seed, threads, out_dir):
    """Qubit-qubit exchange rate versus detuning below the band, numeric
    and closed-form."""
    config, out = _setup(config_path, overrides, seed, threads, out_dir)
    t0 = time.perf_counter()
    p = device_from_config(config)
    centers = grid_from_config(config["exchange_scan"]["grid"])
    rows = exchange_scan(p, centers)
    csv_path = out / "exchange.csv"
    write_exchange_csv(rows, csv_path)
    click.echo(f"wrote {len(rows)} rows to {csv_path}")
    _write_manifest(out, "exchange-scan", config, [csv_path], t0)


@main.command("lz-ramp")
@_common
def lz_ramp(config_path, overrides, seed, threads, out_dir):
    """Double-passage interference through the filter band: final qubit
    population versus ramp time."""
    config, out = _setup(config_path, overrides, seed, threads, out_dir)
    t0 = time.perf_counter()
    p = device_from_config(config)
    c = config["lz_ramp"]
    result = lz_ramp_experiment(
        p, grid_from_config(c["grid"]), total_time=float(c["total_time"]),
        start_nu=float(c["start_nu"]), top_nu=float(c["top_nu"]),
        decoherence=bool(c["decoherence"]),
        realizations=int(c["realizations"]), dt=float(config["run"]["dt"]),
        seed=int(config["run"]["seed"]))
    csv_path = out / "lz_ramp.csv"
    result.write_csv(csv_path)
    click.echo(f"wrote {len(result.grid)} points to {csv_path}")
    _write_manifest(out, "lz-ramp", config, [csv_path], t0)


@main.command("stark-ramsey")
@_common
def stark_ramsey_cmd(config_path, overrides, seed, threads, out_dir):
    """Photon Stark shift versus the second qubit's park frequency, measured
    by Ramsey fringes on a loaded photon."""
    config, out = _setup(config_path, overrides, seed, threads, out_dir)
    t0 = time.perf_counter()
    p = device_from_config(config)
    c = config["stark_ramsey"]
    result = stark_ramsey(
        p, grid_from_config(c["grid"]), grid_from_config(c["tau"]),
        decoherence=bool(c["decoherence"]),
        realizations=int(c["realizations"]), q1_start=float(c["q1_start"]),
        q1_top=float(c["q1_top"]), load_ramp=float(c["load_ramp"]),
        q2_ramp=float(c["q2_ramp"]), reference_nu=float(c["reference_nu"]),
        q1_park=float(c["q1_park"]), dt=float(config["run"]["dt"]),
        seed=int(config["run"]["seed"]))
    csv_path = out / "stark_ramsey.csv"
    result.write_csv(csv_path)
    click.echo(f"wrote {len(result.grid)} points to {csv_path}")
    _write_manifest(out, "stark-ramsey", config, [csv_path], t0)


@main.command("cz-calibrate")
@_common
def cz_calibrate(config_path, overrides, seed, threads, out_dir):
    """Calibrate the controlled-Z schedule and write the schedule, gate
    report, and a conditional-phase-versus-hold-time trace."""
    config, out = _setup(config_path, overrides, seed, threads, out_dir)
    t0 = time.perf_counter()
    p = device_from_config(config)
    c = config["cz"]
    initial = CzSchedule(nu_int=float(c["nu_int"]), t_int=float(c["t_int"]),
                         load_ramp=float(c["load_ramp"]),
                         retrieve_ramp=float(c["retrieve_ramp"]),
                         q2_ramp=float(c["q2_ramp"]))
    dt = float(config["run"]["dt"])
    s = calibrate_cz(p, initial, dt=dt, refine=bool(c["refine"]))
    report = conditional_phase(gate_device(p), s, dt=dt)
    report_path = out / "cz_report.json"
    write_gate_report(report, s, report_path)
    click.echo(f"conditional phase {report.conditional_phase:+.4f} rad, "
               f"hold {s.t_int:.2f} ns, total {s.total_time:.1f} ns")
    # phase-versus-duration trace around the calibrated hold time
    trace_path = out / "phase_vs_duration.csv"
    import csv as csvmod
    from dataclasses import replace
    with open(trace_path, "w", newline="") as fh:
        writer = csvmod.writer(fh)
        writer.writerow(["t_int_ns", "conditional_phase_rad"])
        for t_int in np.linspace(max(2.0, s.t_int - 15.0), s.t_int + 15.0, 13):
            r = conditional_phase(gate_device(p),
                                  replace(s, t_int=float(t_int)), dt=dt)
            writer.writerow([repr(float(t_int)),
                             repr(float(r.conditional_phase))])
    _write_manifest(out, "cz-calibrate", config, [report_path, trace_path], t0)


@main.command()
@_common
def bell(config_path, overrides, seed, threads, out_dir):
    """Prepare a Bell state with the calibrated controlled-Z, run two-qubit
    tomography with finite shots, and report fidelity and concurrence with
    bootstrap error bars."""
    config, out = _setup(config_path, overrides, seed, threads, out_dir)
    t0 = time.perf_counter()
    p = device_from_config(config)
    c = config["cz"]
    b = config["bell"]
    run = config["run"]
    initial = CzSchedule(nu_int=float(c["nu_int"]), t_int=float(c["t_int"]),
                         load_ramp=float(c["load_ramp"]),
                         retrieve_ramp=float(c["retrieve_ramp"]),
                         q2_ramp=float(c["q2_ramp"]))
    dt = float(run["dt"])
    s = calibrate_cz(p, initial, dt=dt, refine=bool(c["refine"]))
    report, rho_true = bell_experiment(
        p, s, decoherence=bool(b["decoherence"]),
        realizations=int(b["realizations"]), dt=dt, seed=int(run["seed"]),
        threads=int(run["threads"]))
    shots = int(b["shots"])
    counts = tomo.simulate_measurements(rho_true, tomo.SETTINGS, shots,
                                        seed=int(run["seed"]) + 7919)
    rho = tomo.reconstruct_state(counts)
    fid, phi = tomo.bell_fidelity(rho)
    conc = tomo.concurrence(rho)
    resamples = int(b["bootstrap_resamples"])
    boot_f = tomo.bootstrap(counts, lambda r: tomo.bell_fidelity(r)[0],
                            resamples=resamples, seed=int(run["seed"]) + 13)
    boot_c = tomo.bootstrap(counts, tomo.concurrence, resamples=resamples,
                            seed=int(run["seed"]) + 17)
    payload = {
        "schedule": s.to_dict(),
        "decoherence": bool(b["decoherence"]),
        "realizations": int(b["realizations"]),
        "shots": shots,
        "bell_fidelity": float(fid),
        "bell_phase": float(phi),
        "concurrence": float(conc),
        "bell_fidelity_bootstrap": boot_f,
        "concurrence_bootstrap": boot_c,
        "leakage": report.leakage,
        "rho_real": np.real(rho).tolist(),
        "rho_imag": np.imag(rho).tolist(),
    }
    json_path = out / "bell_report.json"
    with open(json_path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    click.echo(f"Bell fidelity {fid:.4f} +- {boot_f['std']:.4f}, "
               f"concurrence {conc:.4f} +- {boot_c['std']:.4f}")
    _write_manifest(out, "bell", config, [json_path], t0)


@main.command()
@click.option("--out", "out_dir", type=click.Path(file_okay=False),
              default="out", show_default=True)
@click.option("--realizations", type=int, default=400, show_default=True,
              help="Noise realizations for the decoherent Bell check.")
@click.option("--threads", type=int, default=1, show_default=True)
def validate(out_dir, realizations, threads):
    """Run every acceptance check, print one pass/fail line each, and exit
    nonzero if any fails."""
    from .acceptance import run_all
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    results = run_all(realizations=realizations, threads=threads)
    for r in results:
        click.echo(r.line)
    payload = [{"name": r.name, "passed": r.passed, "detail": r.detail,
                "seconds": r.seconds, "numbers": r.numbers} for r in results]
    with open(out / "validate.json", "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    failed = [r.name for r in results if not r.passed]
    if failed:
        raise click.ClickException("failed: " + ", ".join(failed))
    click.echo(f"all {len(results)} checks passed")


if __name__ == "__main__":
    main()
