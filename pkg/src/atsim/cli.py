"""Command-line front end: JSON configs in, CSV/JSON results out.

Subcommands: spectrum, dynamics, sweep-amplitude, sweep-detuning,
steady-state, optimal, fit, and reproduce <preset> for the built-in
demonstration scenarios (fig2b, fig2c, fig2d, fig3e, fig4, figS5).

Config frequencies are ordinary MHz and are multiplied by 2*pi on ingestion;
set "angular": true to supply rad/us directly.  Decoherence rates are plain
1/us.  Every output embeds the fully resolved config (normalized to angular
units) plus a format version string, so re-running from an embedded config
reproduces the numbers bit-identically.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .experiments import (
    DEFAULT_SCAN_POINTS,
    DEFAULT_SCAN_SPAN,
    amplitude_sweep,
    default_probe_grid,
    detuning_scan_duration,
    detuning_sweep,
    dynamics_trace,
    find_dips,
    optimal_duration,
    optimal_durations,
    pl_from_p0,
    spectrum_scan,
)
from .fitting import default_init, fit
from .lindblad import DecoherenceParams, dissipators_from_params
from .linalg3 import NumericalError
from .model import DriveParams, mhz_to_rad, probe_resonance, rad_to_mhz, rotating_frame_hamiltonian
from .lindblad import steady_state

FORMAT_VERSION = "atsim/1"
ENV_THREADS = "ATSIM_THREADS"


class ConfigError(ValueError):
    """Invalid configuration; message carries the offending field path."""


def _fail(path, message):
    raise ConfigError(f"{path}: {message}")


def _mapping(obj, path):
    if not isinstance(obj, dict):
        _fail(path, f"expected an object, got {type(obj).__name__}")
    return obj


def _field(path, key):
    return f"{path}.{key}" if path else key


def _number(d, key, path, default=None, required=False, minimum=None):
    if key not in d:
        if required:
            _fail(_field(path, key), "required field is missing")
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        _fail(_field(path, key), f"expected a number, got {v!r}")
    v = float(v)
    if not math.isfinite(v):
        _fail(_field(path, key), "must be finite")
    if minimum is not None and v < minimum:
        _fail(_field(path, key), f"must be >= {minimum}, got {v}")
    return v


def _integer(d, key, path, default=None, required=False, minimum=None):
    if key not in d:
        if required:
            _fail(_field(path, key), "required field is missing")
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, int):
        _fail(_field(path, key), f"expected an integer, got {v!r}")
    if minimum is not None and v < minimum:
        _fail(_field(path, key), f"must be >= {minimum}, got {v}")
    return v


def _freq(d, key, path, angular, default=None, required=False, minimum=None):
    """Frequency field, ordinary MHz by default, rad/us under "angular": true."""
    v = _number(d, key, path, default=None, required=required, minimum=None)
    if v is None:
        return default
    rad = v if angular else mhz_to_rad(v)
    if minimum is not None and rad < minimum:
        _fail(_field(path, key), f"must be >= {minimum}, got {rad} rad/us")
    return float(rad)


def parse_drive(config, path="drive"):
    """DriveParams from the config's drive section (always rad/us after this).

    ``delta_p: "auto"`` parks the probe on the branch resonance selected by
    the top-level ``branch`` field (default +1).
    """
    angular = bool(config.get("angular", False))
    d = _mapping(config.get("drive", {}), path)
    delta_p_auto = d.get("delta_p") == "auto"
    try:
        drive = DriveParams(
            omega_c=_freq(d, "omega_c", path, angular, required=True, minimum=0.0),
            omega_p=_freq(d, "omega_p", path, angular, required=True, minimum=0.0),
            delta_c=_freq(d, "delta_c", path, angular, default=0.0),
            delta_p=0.0 if delta_p_auto else _freq(d, "delta_p", path, angular, default=0.0),
            phi_c=_number(d, "phi_c", path, default=0.0),
            phi_p=_number(d, "phi_p", path, default=0.0),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if delta_p_auto:
        branch = _integer(config, "branch", "", default=1)
        if branch not in (1, -1):
            _fail("branch", f"must be 1 or -1, got {branch}")
        drive = drive.replace(delta_p=probe_resonance(drive, branch))
    return drive


def parse_decoherence(config, path="decoherence"):
    section = config.get("decoherence")
    if section is None:
        return None
    d = _mapping(section, path)
    relaxation = d.get("relaxation")
    try:
        return DecoherenceParams(
            gamma1=_number(d, "gamma1", path, default=0.0, minimum=0.0),
            gamma2=_number(d, "gamma2", path, default=0.0, minimum=0.0),
            gamma3=_number(d, "gamma3", path, default=0.0, minimum=0.0),
            relaxation=relaxation,
            contrast=_number(d, "contrast", path, default=0.22),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def parse_noise(config, seed_override=None):
    d = _mapping(config.get("noise", {}), "noise")
    sigma = _number(d, "sigma", "noise", default=0.0, minimum=0.0)
    seed = seed_override if seed_override is not None else d.get("seed")
    if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int) or seed < 0):
        _fail("noise.seed", f"expected a non-negative integer, got {seed!r}")
    return sigma, seed


def parse_scan_grid(config, drive, path="scan"):
    d = _mapping(config.get("scan", {}), path)
    angular = bool(config.get("angular", False))
    if "grid" in d:
        raw = d["grid"]
        if not isinstance(raw, list) or len(raw) < 2:
            _fail(f"{path}.grid", "expected a list of at least 2 detunings")
        try:
            grid = np.array([float(v) for v in raw], dtype=float)
        except (TypeError, ValueError):
            _fail(f"{path}.grid", "entries must be numbers")
        grid = grid if angular else mhz_to_rad(1.0) * grid
        if np.any(np.diff(grid) <= 0):
            _fail(f"{path}.grid", "must be strictly ascending")
        return grid
    span = _number(d, "span_factor", path, default=DEFAULT_SCAN_SPAN, minimum=1e-6)
    points = _integer(d, "points", path, default=DEFAULT_SCAN_POINTS, minimum=5)
    return default_probe_grid(drive.omega_c, span, points)


def parse_duration(config, drive, default_rule, path="duration"):
    """Drive duration from 'duration_us' or the named rule in 'duration_rule'."""
    if "duration_us" in config:
        return _number(config, "duration_us", "", required=True, minimum=0.0)
    rule = config.get("duration_rule", default_rule)
    rules = {"optimal": optimal_duration, "aligned": detuning_scan_duration}
    if rule not in rules:
        _fail("duration_rule", f"expected one of {sorted(rules)} or a duration_us field")
    return rules[rule](drive)


def _dec_resolved(dec):
    if dec is None:
        return None
    out = {
        "gamma1": dec.gamma1,
        "gamma2": dec.gamma2,
        "gamma3": dec.gamma3,
        "contrast": dec.contrast,
    }
    if dec.relaxation is not None:
        out["relaxation"] = [list(row) for row in dec.relaxation]
    return out


def _resolved_common(config, drive, dec, sigma, seed):
    out = {
        "angular": True,
        "drive": {
            "omega_c": drive.omega_c,
            "omega_p": drive.omega_p,
            "delta_c": drive.delta_c,
            "delta_p": drive.delta_p,
            "phi_c": drive.phi_c,
            "phi_p": drive.phi_p,
        },
        "decoherence": _dec_resolved(dec),
    }
    if sigma:
        out["noise"] = {"sigma": sigma, "seed": seed}
    return out


# ---------------------------------------------------------------------------
# subcommand runners: each returns (resolved_config, payload) where payload is
# {"axis": ..., "axis_unit": ..., "columns": [...], "rows": [...], ...}


def run_spectrum(config, seed_override, threads):
    drive = parse_drive(config)
    dec = parse_decoherence(config)
    sigma, seed = parse_noise(config, seed_override)
    grid = parse_scan_grid(config, drive)
    duration = parse_duration(config, drive, "optimal")
    scan = spectrum_scan(drive, grid, duration, dec, noise_sigma=sigma, seed=seed,
                         threads=threads)
    dips = find_dips(scan)
    resolved = _resolved_common(config, drive, dec, sigma, seed)
    resolved.update({"duration_us": duration, "scan": {"grid": [float(v) for v in grid]}})
    payload = {
        "axis": [rad_to_mhz(v) for v in scan.axis],
        "axis_unit": "delta_p_mhz",
        "p0": scan.p0.tolist(),
        "pl": scan.pl.tolist(),
        "dips": [
            {"position_mhz": rad_to_mhz(d.position), "pl": d.value, "p0": d.p0,
             "depth": d.depth}
            for d in dips
        ],
        "columns": ("delta_p_mhz", "p0", "pl"),
        "rows": list(zip((rad_to_mhz(v) for v in scan.axis), scan.p0, scan.pl)),
    }
    return resolved, payload


def _trace_payload(trace):
    return {
        "axis": trace.times.tolist(),
        "axis_unit": "t_us",
        "p0": trace.p0.tolist(),
        "pl": trace.pl.tolist(),
        "dips": [],
        "columns": ("t_us", "p0", "pl"),
        "rows": list(zip(trace.times, trace.p0, trace.pl)),
    }


def run_dynamics(config, seed_override, threads):
    drive_cfg = dict(_mapping(config.get("drive", {}), "drive"))
    drive_cfg.setdefault("delta_p", "auto")
    drive = parse_drive({**config, "drive": drive_cfg})
    dec = parse_decoherence(config)
    sigma, seed = parse_noise(config, seed_override)
    branch = _integer(config, "branch", "", default=1)
    n_max = _integer(config, "n_max", "", required=True, minimum=1)
    trace = dynamics_trace(drive, n_max, dec, branch=branch, noise_sigma=sigma, seed=seed)
    resolved = _resolved_common(config, drive, dec, sigma, seed)
    resolved.update({"n_max": n_max, "branch": branch})
    payload = _trace_payload(trace)
    if config.get("fit"):
        fit_cfg = _mapping(config["fit"], "fit")
        model = fit_cfg.get("model", "damped_cos4")
        data = (trace.times, trace.pl)
        init = fit_cfg.get("init") or default_init(model, data)
        result = fit(model, data, init, bounds=fit_cfg.get("bounds"),
                     multi_start=_integer(fit_cfg, "multi_start", "fit", default=0, minimum=0))
        payload["fit"] = _fit_payload(result)
        resolved["fit"] = {"model": model, "init": init}
    return resolved, payload


def run_sweep_amplitude(config, seed_override, threads):
    angular = bool(config.get("angular", False))
    raw = config.get("omega_c_values")
    if not isinstance(raw, list) or not raw:
        _fail("omega_c_values", "expected a non-empty list of coupling amplitudes")
    scale = 1.0 if angular else mhz_to_rad(1.0)
    omega_c_grid = [scale * float(v) for v in raw]
    ratio = _number(config, "ratio", "", default=None, minimum=1e-9)
    omega_p = _freq(config, "omega_p", "", angular, default=None, minimum=0.0)
    dec = parse_decoherence(config)
    scan_cfg = _mapping(config.get("scan", {}), "scan")
    span = _number(scan_cfg, "span_factor", "scan", default=DEFAULT_SCAN_SPAN, minimum=1e-6)
    points = _integer(scan_cfg, "points", "scan", default=DEFAULT_SCAN_POINTS, minimum=5)
    try:
        pts = amplitude_sweep(omega_c_grid, omega_p=omega_p, ratio=ratio, dec=dec,
                              span_factor=span, points=points, threads=threads)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    resolved = {"angular": True, "omega_c_values": omega_c_grid, "ratio": ratio,
                "omega_p": omega_p, "decoherence": _dec_resolved(dec),
                "scan": {"span_factor": span, "points": points}}
    rows = [
        (rad_to_mhz(p.omega_c),
         rad_to_mhz(p.splitting) if p.splitting is not None else float("nan"),
         len(p.dips))
        for p in pts
    ]
    payload = {
        "axis": [rad_to_mhz(p.omega_c) for p in pts],
        "axis_unit": "omega_c_mhz",
        "splitting_mhz": [rad_to_mhz(p.splitting) if p.splitting is not None else None
                          for p in pts],
        "dips": [
            [{"position_mhz": rad_to_mhz(d.position), "pl": d.value, "p0": d.p0,
              "depth": d.depth} for d in p.dips]
            for p in pts
        ],
        "columns": ("omega_c_mhz", "splitting_mhz", "n_dips"),
        "rows": rows,
    }
    return resolved, payload


def run_sweep_detuning(config, seed_override, threads):
    angular = bool(config.get("angular", False))
    raw = config.get("delta_c_values")
    if not isinstance(raw, list) or not raw:
        _fail("delta_c_values", "expected a non-empty list of coupling detunings")
    scale = 1.0 if angular else mhz_to_rad(1.0)
    delta_c_grid = [scale * float(v) for v in raw]
    drive = parse_drive(config)
    dec = parse_decoherence(config)
    scan_cfg = _mapping(config.get("scan", {}), "scan")
    span = _number(scan_cfg, "span_factor", "scan", default=DEFAULT_SCAN_SPAN, minimum=1e-6)
    points = _integer(scan_cfg, "points", "scan", default=DEFAULT_SCAN_POINTS, minimum=5)
    pts = detuning_sweep(delta_c_grid, drive, dec=dec, span_factor=span, points=points,
                         threads=threads)
    resolved = _resolved_common(config, drive, dec, 0.0, None)
    resolved.update({"delta_c_values": delta_c_grid,
                     "scan": {"span_factor": span, "points": points}})
    rows = []
    for p in pts:
        if p.separation is not None:
            rows.append((rad_to_mhz(p.delta_c), rad_to_mhz(p.positions[0]),
                         rad_to_mhz(p.positions[1]), p.depths[0], p.depths[1],
                         rad_to_mhz(p.separation)))
        else:
            nan = float("nan")
            rows.append((rad_to_mhz(p.delta_c), nan, nan, nan, nan, nan))
    payload = {
        "axis": [rad_to_mhz(p.delta_c) for p in pts],
        "axis_unit": "delta_c_mhz",
        "separation_mhz": [rad_to_mhz(p.separation) if p.separation is not None else None
                           for p in pts],
        "dips": [
            [{"position_mhz": rad_to_mhz(d.position), "pl": d.value, "p0": d.p0,
              "depth": d.depth} for d in p.dips]
            for p in pts
        ],
        "columns": ("delta_c_mhz", "dip_lo_mhz", "dip_hi_mhz", "depth_lo", "depth_hi",
                    "separation_mhz"),
        "rows": rows,
    }
    return resolved, payload


def run_steady_state(config, seed_override, threads):
    drive = parse_drive(config)
    dec = parse_decoherence(config)
    if dec is None or not dec.has_dissipation():
        _fail("decoherence", "steady state requires at least one nonzero rate")
    ops, damping = dissipators_from_params(dec)
    rho = steady_state(rotating_frame_hamiltonian(drive), ops, damping)
    pops = [rho.population(k) for k in range(3)]
    pl = pl_from_p0(pops[0], dec.contrast)
    resolved = _resolved_common(config, drive, dec, 0.0, None)
    payload = {
        "populations": pops,
        "pl": pl,
        "columns": ("p00", "p11", "p22", "pl"),
        "rows": [(pops[0], pops[1], pops[2], pl)],
    }
    return resolved, payload


def run_optimal(config, seed_override, threads):
    drive = parse_drive(config)
    max_index = _integer(config, "max_index", "", default=40, minimum=1)
    entries = optimal_durations(drive.omega_c, drive.omega_p, max_index)
    resolved = _resolved_common(config, drive, None, 0.0, None)
    resolved["max_index"] = max_index
    rows = [(e.t, e.family, e.n, e.k, e.residual, e.p0) for e in entries]
    payload = {
        "durations": [
            {"t_us": e.t, "family": e.family, "n": e.n, "k": e.k,
             "residual": e.residual, "p0": e.p0}
            for e in entries
        ],
        "columns": ("t_us", "family", "n", "k", "residual", "p0"),
        "rows": rows,
    }
    return resolved, payload


def _fit_payload(result):
    return {
        "model": result.model,
        "params": result.params,
        "std_errors": result.std_errors,
        "residual_norm": result.residual_norm,
        "converged": result.converged,
        "iterations": result.iterations,
        "frequencies": result.frequencies,
    }


def _load_fit_data(config):
    if "data" in config:
        raw = config["data"]
        if not isinstance(raw, list):
            _fail("data", "expected a list of [t, y] pairs")
        try:
            return np.array(raw, dtype=float)
        except (TypeError, ValueError):
            _fail("data", "entries must be numeric [t, y] pairs")
    if "data_path" in config:
        path = config["data_path"]
        try:
            with open(path, encoding="utf-8") as fh:
                reader = csv.reader(row for row in fh if not row.startswith("#"))
                rows = []
                for row in reader:
                    if not row:
                        continue
                    try:
                        rows.append((float(row[0]), float(row[1])))
                    except ValueError:
                        continue  # header row
            return np.array(rows, dtype=float)
        except OSError as exc:
            _fail("data_path", f"cannot read {path!r}: {exc}")
    _fail("data", "provide inline 'data' or a 'data_path' CSV with t,y columns")


def run_fit(config, seed_override, threads):
    model = config.get("model")
    if model is None:
        _fail("model", "required field is missing")
    data = _load_fit_data(config)
    try:
        init = config.get("init") or default_init(model, data)
        bounds_cfg = config.get("bounds")
        bounds = {k: tuple(v) for k, v in bounds_cfg.items()} if bounds_cfg else None
        result = fit(model, data, init, bounds=bounds,
                     multi_start=_integer(config, "multi_start", "", default=0, minimum=0),
                     seed=seed_override or 0)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    resolved = {"model": model, "init": init, "data": data.tolist(),
                "multi_start": config.get("multi_start", 0)}
    rows = [(name, result.params[name], result.std_errors[name])
            for name in result.params]
    payload = {
        "fit": _fit_payload(result),
        "columns": ("param", "value", "std_error"),
        "rows": rows,
    }
    return resolved, payload


# ---------------------------------------------------------------------------
# built-in demonstration presets


def _preset_configs():
    ats_drive = {"omega_c": 4.73, "omega_p": 4.73 / 14.0}
    s5_rates = {"gamma1": 0.0784, "gamma2": 0.0784, "gamma3": 0.1568, "contrast": 0.22}
    return {
        # pulsed doublet at matched 2pi coupling / pi probe areas
        "fig2b": ("spectrum", {
            "drive": {"omega_c": 1.0 / 1.8, "omega_p": 0.5 / 1.8},
            "duration_us": 1.8,
        }),
        # splitting tracks the coupling amplitude
        "fig2c": ("sweep-amplitude", {
            "omega_c_values": [2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0],
            "ratio": 14.0,
        }),
        # asymmetric doublet under detuned coupling
        "fig2d": ("sweep-detuning", {
            "drive": dict(ats_drive),
            "delta_c_values": [-2.365, -1.774, -1.183, -0.591, 0.0, 0.591, 1.183,
                               1.774, 2.365],
        }),
        # decohered interference trace with its cos^4 envelope fit
        "fig3e": ("dynamics", {
            "drive": dict(ats_drive),
            "n_max": 165,
            "decoherence": dict(s5_rates),
            "fit": {"model": "damped_cos4"},
        }),
        # dark-interference doublet at the optimal duration
        "fig4": ("spectrum", {
            "drive": dict(ats_drive),
            "duration_rule": "optimal",
        }),
        # simulated decay of the interference envelope toward the mixed state
        "figS5": ("dynamics", {
            "drive": {"omega_c": 5.0, "omega_p": 5.0 / 14.0},
            "n_max": 175,
            "decoherence": dict(s5_rates),
        }),
    }


# ---------------------------------------------------------------------------
# output writing


def _json_default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _fmt(value):
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".12g")
    return str(value)


def write_csv(stream, resolved, payload):
    stream.write(f"# format: {FORMAT_VERSION}\n")
    stream.write(f"# atsim: {__version__}\n")
    stream.write("# config: " + json.dumps(resolved, sort_keys=True, default=_json_default)
                 + "\n")
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(payload["columns"])
    for row in payload["rows"]:
        writer.writerow([_fmt(v) for v in row])


def write_json(stream, resolved, payload):
    doc = {"format": FORMAT_VERSION, "atsim": __version__, "config": resolved}
    for key, value in payload.items():
        if key not in ("columns", "rows"):
            doc[key] = value
    json.dump(doc, stream, indent=2, sort_keys=True, default=_json_default)
    stream.write("\n")


RUNNERS = {
    "spectrum": run_spectrum,
    "dynamics": run_dynamics,
    "sweep-amplitude": run_sweep_amplitude,
    "sweep-detuning": run_sweep_detuning,
    "steady-state": run_steady_state,
    "optimal": run_optimal,
    "fit": run_fit,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="atsim",
        description="Simulate pulsed two-tone spectroscopy of a driven "
                    "three-level spin system.",
    )
    parser.add_argument("--version", action="version", version=f"atsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_config=True):
        if with_config:
            p.add_argument("--config", required=True,
                           help="JSON config file (or a previous JSON result)")
        p.add_argument("--out", default="-", help="output path, '-' for stdout")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--seed", type=int, default=None, help="noise seed override")
        p.add_argument("--threads", type=int, default=None,
                       help=f"scan thread cap (default ${ENV_THREADS} or 1)")

    for name in RUNNERS:
        add_common(sub.add_parser(name))
    rep = sub.add_parser("reproduce", help="run a built-in demonstration preset")
    rep.add_argument("preset", choices=sorted(_preset_configs()))
    add_common(rep, with_config=False)
    return parser


def _load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    # Accept a previous CSV result: its embedded config reproduces the run.
    if text.startswith(f"# format: {FORMAT_VERSION}"):
        for line in text.splitlines():
            if line.startswith("# config: "):
                text = line[len("# config: "):]
                break
        else:
            raise ConfigError(f"{path!r} looks like a result file but embeds no config")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"malformed JSON in {path!r} at line {exc.lineno}, column {exc.colno}: "
            f"{exc.msg}"
        ) from exc
    doc = _mapping(doc, "<config>")
    # Accept a previous JSON result: its embedded config reproduces the run.
    if "config" in doc and "format" in doc:
        return _mapping(doc["config"], "<config>.config")
    return doc


def _resolve_threads(option):
    if option is not None:
        value = option
    else:
        raw = os.environ.get(ENV_THREADS)
        if raw is None:
            return None
        try:
            value = int(raw)
        except ValueError:
            raise ConfigError(f"{ENV_THREADS} must be an integer, got {raw!r}") from None
    if value < 1:
        raise ConfigError(f"thread cap must be >= 1, got {value}")
    return value


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        threads = _resolve_threads(args.threads)
        if args.command == "reproduce":
            command, config = _preset_configs()[args.preset]
        else:
            command = args.command
            config = _load_config(args.config)
        resolved, payload = RUNNERS[command](config, args.seed, threads)
    except ConfigError as exc:
        print(f"atsim: config error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"atsim: config error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"atsim: numerical failure: {exc}", file=sys.stderr)
        return 3

    writer = write_csv if args.format == "csv" else write_json
    if args.out == "-":
        writer(sys.stdout, resolved, payload)
    else:
        buffer = io.StringIO()
        writer(buffer, resolved, payload)
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(buffer.getvalue())
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
