"""Batch command-line frontend.

Subcommands: simulate | diagram | cpb | fom | dephasing | linewidth | cpbscan.
Every run echoes its resolved configuration to the output directory and emits
deterministic CSV (UTF-8, comma, LF, 12 significant digits).  Exit codes:
0 success, 2 configuration error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import analysis, csvio, dynamics, noise
from .config import RunConfig, load_config, default_config, render_config
from .cpb import CPBModel, calibrated_energy_scale, cpb_spectrum
from .errors import ConfigError, NumericsError
from .model3 import DetuningParams, PulseParams, ThreeLevelDrive, pulse_envelopes


def _axis(lo, hi, steps, where):
    if steps < 1:
        raise ConfigError(f"{where}: grid needs at least one point, got {steps}")
    if steps == 1:
        return np.array([lo])
    return np.linspace(lo, hi, steps)


def _pulses(cfg: RunConfig) -> PulseParams:
    p = cfg["pulses"]
    try:
        return PulseParams.from_scaled(p["omega0T"], p["tau_over_T"],
                                       p["kappa_p"], p["kappa_s"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _drive(cfg: RunConfig) -> ThreeLevelDrive:
    pulses = _pulses(cfg)
    det = cfg["detunings"]
    # detunings are configured in units of omega0
    return ThreeLevelDrive(pulses, DetuningParams(det["delta"] * pulses.omega0,
                                                  det["delta_p"] * pulses.omega0))


def _markov_rates(cfg: RunConfig, omega0: float) -> dynamics.MarkovRates:
    m = cfg["markov"]
    try:
        return dynamics.MarkovRates(
            gamma_10=m["gamma_10"] * omega0,
            gamma_tilde_01=m["gamma_tilde_01"] * omega0,
            gamma_tilde_02=m["gamma_tilde_02"] * omega0,
            gamma_tilde_12=m["gamma_tilde_12"] * omega0,
            gamma_20=m["gamma_20"] * omega0,
            gamma_21=m["gamma_21"] * omega0)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _spa_spec(cfg: RunConfig) -> noise.SPASpec:
    n = cfg["noise"]
    return noise.SPASpec(
        sigma_x=n["sigma_x"], method=n["method"], order=n["order"],
        samples=n["samples"], seed=n["seed"],
        fluct_detunings_linear=n["fluctuate.detunings_linear"],
        fluct_detunings_quadratic=n["fluctuate.detunings_quadratic"],
        fluct_rabi_linear=n["fluctuate.rabi_linear"],
        fluct_rabi_quadratic=n["fluctuate.rabi_quadratic"])


def _device_spectrum(cfg: RunConfig, dipole_derivatives=True):
    d = cfg["device"]
    try:
        model = CPBModel(J=d["j"], q_g=d["q_g"], n_max=d["n_max"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return cpb_spectrum(model, dipole_derivatives=dipole_derivatives)


def _energy_scale(cfg: RunConfig, spectrum, omega0: float) -> float:
    """Charging-unit conversion in 1/T units; derived from the Rabi-drive
    calibration unless device.energy_scale overrides it."""
    d = cfg["device"]
    if d["energy_scale"] > 0.0:
        return d["energy_scale"] * omega0
    charging_over_rabi = d["charging_ghz"] * 1e3 / d["rabi_mhz"]
    return calibrated_energy_scale(spectrum, charging_over_rabi) * omega0


def _echo_config(cfg: RunConfig, outdir: str):
    os.makedirs(outdir, exist_ok=True)
    with open(os.path.join(outdir, "resolved.cfg"), "w", encoding="utf-8",
              newline="") as fh:
        fh.write(render_config(cfg))


def _check_resume_config(cfg: RunConfig, outdir: str):
    """A resumed sweep must run under the identical resolved config."""
    path = os.path.join(outdir, "resolved.cfg")
    if os.path.exists(path):
        with open(path, encoding="utf-8") as fh:
            if fh.read() != render_config(cfg):
                raise ConfigError(
                    f"output directory {outdir!r} holds results for a different "
                    f"config; use a fresh --out or matching config")


# ---------------------------------------------------------------------------
# subcommands

def cmd_simulate(cfg: RunConfig, outdir: str, workers: int) -> int:
    drive = _drive(cfg)
    s = cfg["simulate"]
    grid = dynamics.protocol_grid(drive.pulses, s["grid_points"])
    prec = cfg["output"]["precision"]
    try:
        tol = s["tol"]
        if not dynamics.TOL_MIN <= tol <= dynamics.TOL_MAX:
            raise ConfigError(f"simulate.tol out of range: {tol}")
        rates = _markov_rates(cfg, drive.pulses.omega0)
        if s["use_noise"]:
            spec = _spa_spec(cfg)
            spectrum = _device_spectrum(cfg)
            es = _energy_scale(cfg, spectrum, drive.pulses.omega0)
            res = noise.spa_average(drive, spectrum, spec,
                                    rates=rates if rates.any_active() else None,
                                    energy_scale=es, grid=grid, tol=tol)
            times, pops, trace = res.times, res.populations, None
            eff = res.efficiency
        elif rates.any_active():
            traj = dynamics.propagate_lindblad(drive, rates, grid=grid, tol=tol)
            times, pops, trace = traj.times, traj.populations, traj.trace
            eff = traj.efficiency
        else:
            traj = dynamics.propagate_unitary(drive, grid=grid, tol=tol)
            times, pops, trace = traj.times, traj.populations, None
            eff = traj.efficiency
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    header = ["t", "P0", "P1", "P2"] + (["trace"] if trace is not None else [])
    rows = []
    for k in range(len(times)):
        row = [float(times[k]), float(pops[k, 0]), float(pops[k, 1]),
               float(pops[k, 2])]
        if trace is not None:
            row.append(float(trace[k]))
        rows.append(row)
    csvio.write_csv(os.path.join(outdir, "trajectory.csv"), header, rows, prec)
    omega_p, omega_s = pulse_envelopes(times, drive.pulses)
    csvio.write_csv(os.path.join(outdir, "pulses.csv"),
                    ["t", "omega_p", "omega_s"],
                    [(float(times[k]), float(omega_p[k]), float(omega_s[k]))
                     for k in range(len(times))], prec)
    print(f"efficiency = {eff:.12g}")
    return 0


def cmd_diagram(cfg: RunConfig, outdir: str, workers: int) -> int:
    pulses = _pulses(cfg)
    sw = cfg["sweep"]
    prec = cfg["output"]["precision"]
    delta_axis = _axis(sw["delta_min"], sw["delta_max"], sw["delta_steps"],
                       "sweep.delta") * pulses.omega0
    delta_p_axis = _axis(sw["delta_p_min"], sw["delta_p_max"],
                         sw["delta_p_steps"], "sweep.delta_p") * pulses.omega0
    D, DP = np.meshgrid(delta_axis, delta_p_axis, indexing="ij")
    cells_d, cells_p = D.ravel(), DP.ravel()
    total = len(cells_d)
    map_path = os.path.join(outdir, "efficiency_map.csv")
    done = 0
    if os.path.exists(map_path):
        done = csvio.count_data_rows(map_path)
        if done > total:
            raise ConfigError(f"{map_path} has more rows than the configured grid")
    if done == 0:
        csvio.write_csv(map_path, ["delta", "delta_p", "efficiency"], [], prec)
    step = max(1, sw["checkpoint_every"])
    # chunks sit on absolute boundaries so a resumed sweep reproduces the
    # batch composition (and hence the bytes) of an uninterrupted run; a
    # partial chunk is recomputed and only its missing rows are appended
    for start in range((done // step) * step, total, step):
        stop = min(start + step, total)
        if stop <= done:
            continue
        effs = analysis.sweep_cells(pulses, cells_d[start:stop],
                                    cells_p[start:stop], tol=sw["tol"],
                                    workers=workers)
        csvio.append_rows(map_path,
                          [(float(cells_d[k]), float(cells_p[k]),
                            float(effs[k - start]))
                           for k in range(max(start, done), stop)], prec)
    values = _read_map_values(map_path, total).reshape(len(delta_axis),
                                                       len(delta_p_axis))
    contour_rows = []
    for level in sw["levels"]:
        polys = analysis.contour_polylines(delta_axis, delta_p_axis, values,
                                           level)
        for pid, poly in enumerate(polys):
            for x, y in poly:
                contour_rows.append((float(level), pid, float(x), float(y)))
    csvio.write_csv(os.path.join(outdir, "contours.csv"),
                    ["level", "polyline", "delta", "delta_p"], contour_rows,
                    prec)
    print(f"diagram: {total} cells -> {map_path}")
    return 0


def _read_map_values(path, expected):
    vals = []
    with open(path, encoding="utf-8") as fh:
        next(fh)
        for line in fh:
            vals.append(float(line.rsplit(",", 1)[1]))
    if len(vals) != expected:
        raise NumericsError(f"{path}: expected {expected} rows, found {len(vals)}")
    return np.array(vals)


def cmd_cpb(cfg: RunConfig, outdir: str, workers: int) -> int:
    d = cfg["device"]
    t = cfg["cpbtable"]
    prec = cfg["output"]["precision"]
    rows = []
    for qg in _axis(t["qg_min"], t["qg_max"], t["qg_steps"], "cpbtable.qg"):
        try:
            s = cpb_spectrum(CPBModel(J=d["j"], q_g=float(qg), n_max=d["n_max"]),
                             dipole_derivatives=False)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        nm = s.n_matrix
        rows.append((float(qg), d["j"], float(s.energies[1]), float(s.energies[2]),
                     float(nm[0, 1]), float(nm[0, 2]), float(nm[1, 2]),
                     float(s.A[1]), float(s.A[2]), float(s.B[1]), float(s.B[2])))
    csvio.write_csv(os.path.join(outdir, "spectrum.csv"),
                    ["q_g", "J", "E1", "E2", "n01", "n02", "n12",
                     "A1", "A2", "B1", "B2"], rows, prec)
    print(f"cpb: {len(rows)} rows")
    return 0


def cmd_fom(cfg: RunConfig, outdir: str, workers: int) -> int:
    f = cfg["fom"]
    prec = cfg["output"]["precision"]
    j_axis = _axis(f["j_min"], f["j_max"], f["j_steps"], "fom.j")
    qg_axis = _axis(f["qg_min"], f["qg_max"], f["qg_steps"], "fom.qg")
    mm = analysis.merit_map(j_axis, qg_axis, cfg["noise"]["sigma_x"],
                            n_max=cfg["device"]["n_max"])
    rows = []
    for i, j in np.ndindex(mm.merit.shape):
        rows.append((float(mm.j_axis[i]), float(mm.qg_axis[j]),
                     float(mm.n02[i, j]), float(mm.a1[i, j]), float(mm.b1[i, j]),
                     float(mm.sigma_delta[i, j]), float(mm.merit[i, j])))
    csvio.write_csv(os.path.join(outdir, "merit_map.csv"),
                    ["J", "q_g", "n02", "A1", "B1", "sigma_delta", "merit"],
                    rows, prec)
    print(f"fom: {len(rows)} cells")
    return 0


def cmd_dephasing(cfg: RunConfig, outdir: str, workers: int) -> int:
    dp = cfg["dephasing"]
    prec = cfg["output"]["precision"]
    try:
        rows = []
        for mode in ("markov", "spa"):
            for omega0T, p0, p1, p2 in analysis.dephasing_scan(
                    dp["omega0T_list"], dp["t2_over_T"], mode, a1=dp["a1"],
                    tau_over_T=dp["tau_over_T"], order=dp["order"],
                    tol=dp["tol"]):
                rows.append((omega0T, mode, p0, p1, p2))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    rows.sort(key=lambda r: (r[0], r[1]))
    csvio.write_csv(os.path.join(outdir, "dephasing.csv"),
                    ["omega0T", "mode", "P0", "P1", "P2"], rows, prec)
    print(f"dephasing: {len(rows)} rows")
    return 0


def cmd_linewidth(cfg: RunConfig, outdir: str, workers: int) -> int:
    lw = cfg["linewidth"]
    pulses = _pulses(cfg)
    prec = cfg["output"]["precision"]
    try:
        half = analysis.two_photon_linewidth(pulses, slope=lw["slope"],
                                             level=lw["level"], tol=lw["tol"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    csvio.write_csv(os.path.join(outdir, "linewidth.csv"),
                    ["slope", "level", "omega0T", "delta_half",
                     "delta_half_over_omega0"],
                    [(lw["slope"], lw["level"], pulses.omega0, float(half),
                      float(half / pulses.omega0))], prec)
    print(f"delta_half = {half:.12g} (= {half / pulses.omega0:.12g} omega0)")
    return 0


def cmd_cpbscan(cfg: RunConfig, outdir: str, workers: int) -> int:
    sc = cfg["cpbscan"]
    d = cfg["device"]
    prec = cfg["output"]["precision"]
    qg_list = _axis(sc["qg_min"], sc["qg_max"], sc["qg_steps"], "cpbscan.qg")
    try:
        rows = analysis.cpb_efficiency_scan(
            j=d["j"], qg_list=qg_list, sigma_x=cfg["noise"]["sigma_x"],
            omega0T_ref=cfg["pulses"]["omega0T"], qg_ref=sc["qg_ref"],
            charging_over_rabi=d["charging_ghz"] * 1e3 / d["rabi_mhz"],
            tiers=sc["tiers"], t1_over_T_list=sc["t1_over_T_list"],
            tau_over_T=cfg["pulses"]["tau_over_T"], n_max=d["n_max"],
            order=cfg["noise"]["order"], tol=sc["tol"], workers=workers)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    csvio.write_csv(os.path.join(outdir, "cpbscan.csv"),
                    ["q_g", "tier", "omega0T", "efficiency"],
                    [(float(q), t, float(o), float(e)) for q, t, o, e in rows],
                    prec)
    print(f"cpbscan: {len(rows)} rows")
    return 0


COMMANDS = {
    "simulate": cmd_simulate,
    "diagram": cmd_diagram,
    "cpb": cmd_cpb,
    "fom": cmd_fom,
    "dephasing": cmd_dephasing,
    "linewidth": cmd_linewidth,
    "cpbscan": cmd_cpbscan,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stiraplab",
        description="STIRAP in a three-level Lambda system under broadband "
                    "colored noise: batch simulations and sweeps")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="INI-style run configuration")
        p.add_argument("--out", help="output directory (default from config)")
        p.add_argument("--workers", type=int, default=1,
                       help="worker processes for sweeps")
        p.add_argument("--seed", type=int, help="override noise.seed")
        if name == "linewidth":
            p.add_argument("--level", type=float,
                           help="override linewidth.level")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else default_config()
        if args.seed is not None:
            cfg["noise"]["seed"] = args.seed
        if getattr(args, "level", None) is not None:
            cfg["linewidth"]["level"] = args.level
        if args.workers < 1:
            raise ConfigError(f"--workers must be >= 1, got {args.workers}")
        outdir = args.out or cfg["output"]["directory"]
        if args.command == "diagram":
            _check_resume_config(cfg, outdir)
        os.makedirs(outdir, exist_ok=True)
        _echo_config(cfg, outdir)
        return COMMANDS[args.command](cfg, outdir, args.workers)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericsError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
