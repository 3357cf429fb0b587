"""
Command-line front end.

    ps-rydberg structure  [--temperature K --bfield T --n-min --n-max]
    ps-rydberg fluence    [--scheme --n-final --spot MM --overdrive X]
    ps-rydberg rate       [--fluence UJ_CM2 --fsat UJ_CM2 --duration NS]
    ps-rydberg simulate   [--config FILE --seed N --realizations N --single]
    ps-rydberg scan       --axis {T,B,n_final,fluence2,dlambda2} --grid 20,21,...

Config files are JSON with the blocks environment/scheme/pulses/simulation/
output (plus structure, fluence, rate, scan); flags override file values.
Boundary units: K, T, nm, ns, uJ/cm^2, mm. Unknown keys are rejected.
Every output carries a header with version, schema and the resolved config,
so re-running with that config reproduces the file byte for byte.
"""

from __future__ import annotations

import argparse
import copy
import io
import json
import math
import sys

import numpy as np

from . import __version__
from .bloch import SCHEMES, LadderConfig, simulate_ensemble, simulate_one, worker_count
from .constants import MM, NM, NS, UJ_PER_CM2, transition_wavelength
from .errors import ConfigError, ConvergenceError
from .saturation import (
    LaserPulse,
    fluence_report,
    fsat_3n,
    fsat_13,
    rate_population,
    rate_population_numeric,
)
from .structure import (
    CSV_COLUMNS,
    Environment,
    band_csv_row,
    interleaving_onset,
    ionization_limit,
    structure_table,
    useful_range,
)

SCHEMA_VERSION = 1
SCAN_AXES = ("T", "B", "n_final", "fluence2", "dlambda2")
EXIT_CONFIG = 2
EXIT_CONVERGENCE = 3

# Reference scenario; pulse entries left as None are filled per scheme.
DEFAULTS = {
    "environment": {"T": 100.0, "B": 1.0},
    "scheme": {"ladder": "1-3-n", "n_final": 25, "final_l": 2},
    "pulses": [
        {"lambda_nm": None, "dlambda_nm": None, "duration_ns": None, "fluence_uJ_cm2": None, "t_center_ns": 0.0},
        {"lambda_nm": None, "dlambda_nm": None, "duration_ns": None, "fluence_uJ_cm2": None, "t_center_ns": 0.0},
    ],
    "simulation": {
        "mode": "ensemble",
        "seed": 20110401,
        "realizations": 300,
        "dt_ns": None,
        "steps_per_jump": 10,
        "beams": "co",
        "decay": True,
        "mid_lifetime_ns": None,
        "sigma_ion_mid_m2": None,
        "sigma_ion_ryd_m2": None,
        "record_points": 400,
    },
    "output": {"format": "csv", "path": None},
    "structure": {"n_min": 10, "n_max": 35},
    "fluence": {"spot_mm": 2.8, "overdrive": 2.0, "width": "thermal"},
    "rate": {"fluence_uJ_cm2": None, "fsat_uJ_cm2": None, "duration_ns": 4.0, "points": 201},
    "scan": {"axis": None, "grid": []},
}

# Reference pulse parameters per scheme: dlambda [nm], duration [ns], fluence [uJ/cm^2]
SCHEME_PULSES = {
    "1-3-n": ((0.045, 4.0, 200.0), (0.72, 2.0, 2000.0)),
    "1-2-n": ((0.054, 4.0, 25.7), (0.36, 2.0, 8000.0)),
}


def _merge(base: dict, over: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, val in over.items():
        where = f"{path}{key}"
        if key not in base:
            raise ConfigError(f"unknown config key '{where}'")
        if key == "pulses":
            if not isinstance(val, list) or len(val) != 2:
                raise ConfigError("'pulses' must be a list of two pulse blocks")
            out[key] = [_merge(base[key][i], p, f"pulses[{i}].") for i, p in enumerate(val)]
        elif isinstance(base[key], dict):
            if not isinstance(val, dict):
                raise ConfigError(f"'{where}' must be an object")
            out[key] = _merge(base[key], val, where + ".")
        else:
            out[key] = val
    return out


def load_config(path: str | None) -> dict:
    if path is None:
        return copy.deepcopy(DEFAULTS)
    try:
        with open(path) as fh:
            user = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(user, dict):
        raise ConfigError("config root must be an object")
    return _merge(DEFAULTS, user)


def _set(run: dict, block: str, key: str, value):
    if value is not None:
        run[block][key] = value


def apply_flags(run: dict, args) -> dict:
    run = copy.deepcopy(run)
    g = lambda name: getattr(args, name, None)  # noqa: E731
    _set(run, "environment", "T", g("temperature"))
    _set(run, "environment", "B", g("bfield"))
    _set(run, "scheme", "ladder", g("scheme"))
    _set(run, "scheme", "n_final", g("n_final"))
    _set(run, "simulation", "seed", g("seed"))
    _set(run, "simulation", "realizations", g("realizations"))
    _set(run, "simulation", "dt_ns", g("dt"))
    _set(run, "simulation", "beams", g("beams"))
    if g("no_decay"):
        run["simulation"]["decay"] = False
    if g("single"):
        run["simulation"]["mode"] = "single"
    _set(run, "output", "format", g("format"))
    _set(run, "output", "path", g("out"))
    _set(run, "structure", "n_min", g("n_min"))
    _set(run, "structure", "n_max", g("n_max"))
    _set(run, "fluence", "spot_mm", g("spot"))
    _set(run, "fluence", "overdrive", g("overdrive"))
    _set(run, "rate", "fluence_uJ_cm2", g("rate_fluence"))
    _set(run, "rate", "fsat_uJ_cm2", g("fsat"))
    _set(run, "rate", "duration_ns", g("duration"))
    _set(run, "scan", "axis", g("axis"))
    if g("grid") is not None:
        run["scan"]["grid"] = g("grid")
    for i in (1, 2):
        p = run["pulses"][i - 1]
        _set({"p": p}, "p", "fluence_uJ_cm2", g(f"fluence{i}"))
        _set({"p": p}, "p", "dlambda_nm", g(f"dlambda{i}"))
        _set({"p": p}, "p", "duration_ns", g(f"duration{i}"))
        _set({"p": p}, "p", "t_center_ns", g(f"t_center{i}"))
    return run


def resolve(run: dict) -> dict:
    """Fill scheme-dependent pulse defaults so the echoed config is complete."""
    run = copy.deepcopy(run)
    ladder = run["scheme"]["ladder"]
    if ladder not in SCHEMES:
        raise ConfigError(f"unknown ladder {ladder!r}; choose from {sorted(SCHEMES)}")
    n_mid = SCHEMES[ladder]
    n_final = run["scheme"]["n_final"]
    if not isinstance(n_final, int) or isinstance(n_final, bool) or not n_mid < n_final <= 200:
        raise ConfigError(f"n_final must be an integer in ({n_mid}, 200]")
    legs = ((1, n_mid), (n_mid, n_final))
    for p, (lo, hi), (dl, dur, flu) in zip(run["pulses"], legs, SCHEME_PULSES[ladder]):
        if p["lambda_nm"] is None:
            p["lambda_nm"] = transition_wavelength(lo, hi) / NM
        if p["dlambda_nm"] is None:
            p["dlambda_nm"] = dl
        if p["duration_ns"] is None:
            p["duration_ns"] = dur
        if p["fluence_uJ_cm2"] is None:
            p["fluence_uJ_cm2"] = flu
    fmt = run["output"]["format"]
    if fmt not in ("csv", "json"):
        raise ConfigError(f"output format must be csv or json, got {fmt!r}")
    return run


def environment(run: dict) -> Environment:
    try:
        return Environment(T=float(run["environment"]["T"]), B=float(run["environment"]["B"]))
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def ladder_config(run: dict) -> LadderConfig:
    sim = run["simulation"]
    opt = lambda v, unit: None if v is None else float(v) * unit  # noqa: E731
    try:
        pulses = tuple(
            LaserPulse(
                lambda0=float(p["lambda_nm"]) * NM,
                dlambda=float(p["dlambda_nm"]) * NM,
                duration=float(p["duration_ns"]) * NS,
                fluence=float(p["fluence_uJ_cm2"]) * UJ_PER_CM2,
                t_center=float(p["t_center_ns"]) * NS,
            )
            for p in run["pulses"]
        )
        return LadderConfig(
            pulses=pulses,
            scheme=run["scheme"]["ladder"],
            n_final=run["scheme"]["n_final"],
            final_l=run["scheme"]["final_l"],
            env=environment(run),
            mid_lifetime=opt(sim["mid_lifetime_ns"], NS),
            decay=bool(sim["decay"]),
            sigma_ion_mid=opt(sim["sigma_ion_mid_m2"], 1.0),
            sigma_ion_ryd=opt(sim["sigma_ion_ryd_m2"], 1.0),
            seed=int(sim["seed"]),
            n_realizations=int(sim["realizations"]),
            dt=opt(sim["dt_ns"], NS),
            steps_per_jump=int(sim["steps_per_jump"]),
            beams=sim["beams"],
            record_points=int(sim["record_points"]),
        )
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


# ---- output -------------------------------------------------------------


def _header(command: str, run: dict, extra: dict | None = None) -> dict:
    head = {
        "tool": "ps_rydberg",
        "version": __version__,
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "seed": run["simulation"]["seed"],
        "config": run,
    }
    if extra:
        head.update(extra)
    return head


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    return repr(float(x))


def render_csv(head: dict, columns, rows) -> str:
    buf = io.StringIO()
    for key, val in head.items():
        buf.write(f"# {key}: {json.dumps(val, sort_keys=True)}\n")
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        return None if math.isnan(x) else float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def render_json(head: dict, columns, rows, summary: dict | None = None) -> str:
    doc = dict(head)
    if summary is not None:
        doc["summary"] = summary
    doc["columns"] = list(columns)
    doc["rows"] = [list(r) for r in rows]
    return json.dumps(_jsonable(doc), sort_keys=True, indent=1) + "\n"


def emit(run: dict, command: str, columns, rows, summary: dict | None = None) -> None:
    head = _header(command, run)
    if run["output"]["format"] == "json":
        text = render_json(head, columns, rows, summary)
    else:
        if summary:
            head["summary"] = _jsonable(summary)
        text = render_csv(head, columns, rows)
    path = run["output"]["path"]
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


# ---- commands -------------------------------------------------------------


def cmd_structure(run: dict) -> None:
    env = environment(run)
    lo, hi = run["structure"]["n_min"], run["structure"]["n_max"]
    try:
        table = structure_table(env, range(int(lo), int(hi) + 1))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    u_lo, u_hi = useful_range(env)
    markers = {
        "interleaving_onset": interleaving_onset(env),
        "ionization_onset": ionization_limit(env),
        "useful_range": [u_lo, u_hi],
    }
    emit(run, "structure", CSV_COLUMNS, [band_csv_row(b) for b in table], markers)


def fluence_rows(run: dict) -> list:
    env = environment(run)
    n_mid = SCHEMES[run["scheme"]["ladder"]]
    n = run["scheme"]["n_final"]
    fl = run["fluence"]
    spot = float(fl["spot_mm"]) * MM
    od = float(fl["overdrive"])
    try:
        legs = (
            (f"1-{n_mid}", transition_wavelength(1, n_mid), fsat_13(env, n_mid, fl["width"])),
            (f"{n_mid}-{n}", transition_wavelength(n_mid, n), fsat_3n(n, n_mid, run["scheme"]["final_l"])),
        )
        rows = []
        for name, lam, fs in legs:
            rep = fluence_report(fs, spot, od)
            rows.append((name, lam / NM, rep.f_sat / UJ_PER_CM2, rep.pulse_energy / 1e-6, spot / MM, od))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return rows


def cmd_fluence(run: dict) -> None:
    cols = ("leg", "lambda[nm]", "F_sat[uJ/cm2]", "pulse_energy[uJ]", "spot_fwhm[mm]", "overdrive")
    rows = fluence_rows(run)
    emit(run, "fluence", cols, rows)


def cmd_rate(run: dict) -> None:
    env = environment(run)
    n_mid = SCHEMES[run["scheme"]["ladder"]]
    r = run["rate"]
    fsat = r["fsat_uJ_cm2"]
    fsat = fsat_13(env, n_mid, run["fluence"]["width"]) if fsat is None else float(fsat) * UJ_PER_CM2
    flu = r["fluence_uJ_cm2"]
    flu = fsat if flu is None else float(flu) * UJ_PER_CM2
    tau = float(r["duration_ns"]) * NS
    if flu == 0:
        pulse = None
    else:
        pulse = LaserPulse(transition_wavelength(1, n_mid), 0.045 * NM, tau, flu)
    t = np.linspace(-3 * tau, 3 * tau, int(r["points"]))
    if pulse is None:
        cum = p_a = p_n = np.zeros_like(t)
    else:
        cum = pulse.cumulative_fluence(t)
        p_a = rate_population(t, pulse, fsat)
        _, p_n = rate_population_numeric(pulse, fsat, t)
    r["fluence_uJ_cm2"] = flu / UJ_PER_CM2
    r["fsat_uJ_cm2"] = fsat / UJ_PER_CM2
    cols = ("t[ns]", "F[uJ/cm2]", "P_analytic", "P_numeric")
    rows = zip(t / NS, cum / UJ_PER_CM2, p_a, p_n)
    emit(run, "rate", cols, list(rows))


SIM_COLUMNS = ("t[ns]", "p1", "p_mid", "p_ryd", "p_ion")


def cmd_simulate(run: dict) -> None:
    cfg = ladder_config(run)
    if run["simulation"]["mode"] == "single":
        rec = simulate_one(cfg)
        rows = zip(rec.times / NS, rec.p_ground, rec.p_mid, rec.p_ryd, rec.p_ion)
        summary = {
            "mode": "single",
            "final": dict(zip(("p1", "p_mid", "p_ryd", "p_ion"), rec.final().tolist())),
            "velocity_sample": rec.velocity_sample,
            "max_trace_error": rec.max_trace_error,
        }
    elif run["simulation"]["mode"] == "ensemble":
        res = simulate_ensemble(cfg, worker_count())
        rows = zip(res.times / NS, *res.mean)
        summary = {"mode": "ensemble", "n_realizations": res.n_realizations, "max_trace_error": res.max_trace_error}
        for key, (m, se) in zip(
            ("p1", "p_mid", "p_ryd", "p_ion"), (res.final_ground, res.final_mid, res.final_ryd, res.final_ion)
        ):
            summary[f"final_{key}"] = m
            summary[f"final_{key}_se"] = se
    else:
        raise ConfigError("simulation.mode must be 'single' or 'ensemble'")
    emit(run, "simulate", SIM_COLUMNS, list(rows), summary)


def scan_point(run: dict, axis: str, value) -> dict:
    pt = copy.deepcopy(run)
    if axis in ("T", "B"):
        pt["environment"][axis] = float(value)
    elif axis == "n_final":
        if float(value) != int(value):
            raise ConfigError("n_final grid must hold integers")
        pt["scheme"]["n_final"] = int(value)
        # keep pulse 2 on resonance with the new band
        n_mid = SCHEMES[pt["scheme"]["ladder"]]
        pt["pulses"][1]["lambda_nm"] = transition_wavelength(n_mid, int(value)) / NM
    elif axis == "fluence2":
        # grid in units of the leg-two saturation fluence
        n_mid = SCHEMES[pt["scheme"]["ladder"]]
        fs = fsat_3n(pt["scheme"]["n_final"], n_mid, pt["scheme"]["final_l"])
        pt["pulses"][1]["fluence_uJ_cm2"] = float(value) * fs / UJ_PER_CM2
    elif axis == "dlambda2":
        pt["pulses"][1]["dlambda_nm"] = float(value)
    else:
        raise ConfigError(f"scan axis must be one of {SCAN_AXES}")
    return pt


def scan(run: dict) -> list:
    axis, grid = run["scan"]["axis"], run["scan"]["grid"]
    if axis not in SCAN_AXES:
        raise ConfigError(f"scan axis must be one of {SCAN_AXES}, got {axis!r}")
    if not grid:
        raise ConfigError("scan grid is empty")
    rows = []
    for value in grid:
        cfg = ladder_config(scan_point(run, axis, value))
        res = simulate_ensemble(cfg, worker_count())
        rows.append((value,) + res.final_ryd + res.final_ion + res.final_mid)
    return rows


def cmd_scan(run: dict) -> None:
    cols = (run["scan"]["axis"] or "value", "p_ryd", "p_ryd_se", "p_ion", "p_ion_se", "p_mid", "p_mid_se")
    emit(run, "scan", cols, scan(run))


COMMANDS = {
    "structure": cmd_structure,
    "fluence": cmd_fluence,
    "rate": cmd_rate,
    "simulate": cmd_simulate,
    "scan": cmd_scan,
}


def _grid(text: str) -> list:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}") from None
    return [int(v) if v.is_integer() else v for v in vals]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--temperature", type=float, help="K")
    common.add_argument("--bfield", type=float, help="T")
    common.add_argument("--scheme", choices=sorted(SCHEMES))
    common.add_argument("--n-final", type=int)

    sim = argparse.ArgumentParser(add_help=False)
    sim.add_argument("--seed", type=int)
    sim.add_argument("--realizations", type=int)
    sim.add_argument("--dt", type=float, help="integrator step, ns")
    sim.add_argument("--beams", choices=("co", "counter"))
    sim.add_argument("--no-decay", action="store_true")
    for i in (1, 2):
        sim.add_argument(f"--fluence{i}", type=float, help=f"pulse {i} fluence, uJ/cm^2")
        sim.add_argument(f"--dlambda{i}", type=float, help=f"pulse {i} bandwidth, nm")
        sim.add_argument(f"--duration{i}", type=float, help=f"pulse {i} FWHM duration, ns")
        sim.add_argument(f"--t-center{i}", type=float, dest=f"t_center{i}", help=f"pulse {i} centre, ns")

    p = argparse.ArgumentParser(prog="ps-rydberg", description="Ps Rydberg laser excitation toolkit")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("structure", parents=[common], help="level-structure table")
    s.add_argument("--n-min", type=int)
    s.add_argument("--n-max", type=int)

    f = sub.add_parser("fluence", parents=[common], help="saturation fluences and pulse energies")
    f.add_argument("--spot", type=float, help="beam FWHM, mm")
    f.add_argument("--overdrive", type=float, help="peak fluence / F_sat")

    r = sub.add_parser("rate", parents=[common], help="rate-model population vs time")
    r.add_argument("--fluence", type=float, dest="rate_fluence", help="uJ/cm^2 (default F_sat)")
    r.add_argument("--fsat", type=float, help="uJ/cm^2 (default leg-one value)")
    r.add_argument("--duration", type=float, help="ns")

    m = sub.add_parser("simulate", parents=[common, sim], help="stochastic Bloch simulation")
    m.add_argument("--single", action="store_true", help="one realization instead of an ensemble")

    c = sub.add_parser("scan", parents=[common, sim], help="ensemble fractions over a parameter grid")
    c.add_argument("--axis", choices=SCAN_AXES)
    c.add_argument("--grid", type=_grid, help="comma-separated values")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        run = resolve(apply_flags(load_config(args.config), args))
        COMMANDS[args.command](run)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceError as exc:
        print(f"convergence error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return 0


if __name__ == "__main__":
    sys.exit(main())
