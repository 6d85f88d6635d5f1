"""Batch front end: parse a run config, dispatch to an experiment, write
plot-ready outputs with a reproducibility manifest.

Config files are TOML (JSON accepted too): a top-level ``experiment`` name
plus a ``[params]`` table whose keys carry explicit units in their names
(lengths in meters unless a unit suffix says otherwise).  A ``[sweep.grid]``
table maps parameter names to lists for grid sweeps.

Exit codes: 0 ok, 1 engine/numerical error, 2 config error.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import dataclasses
import hashlib
import itertools
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, experiments, gem, gridio
from .errors import ConfigError, PhotonFluidError

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

OUTPUT_ROOT_ENV = "PHOTONFLUID_OUT"


# ---------------------------------------------------------------------------
# Experiment registry
# ---------------------------------------------------------------------------

def _dataclass_config(cls, params: dict):
    """Build a config dataclass from the params table, naming bad fields."""
    fields = {f.name: f for f in dataclasses.fields(cls)}
    unknown = set(params) - set(fields)
    if unknown:
        raise ConfigError(f"unknown config field(s) {sorted(unknown)} for {cls.__name__}")
    converted = {}
    for key, value in params.items():
        if isinstance(value, list):
            value = tuple(value)
        converted[key] = value
    try:
        return cls(**converted)
    except (TypeError, ValueError, ConfigError) as exc:
        raise ConfigError(f"invalid config: {exc}") from exc


def _run_bogoliubov_scan(params, outdir: Path, rng) -> dict:
    config = _dataclass_config(experiments.ProbeScanConfig, params)
    result = experiments.bogoliubov_probe_scan(config)
    gridio.write_csv(outdir / "group_velocity.csv",
                     ["k", "v_measured", "v_analytic"],
                     [result.k_values, result.v_measured, result.v_analytic])
    gridio.write_csv(outdir / "dispersion.csv",
                     ["k", "omega_measured", "omega_analytic"],
                     [result.k_values, result.omega_reconstructed,
                      result.omega_analytic])
    return {
        "sound_speed": result.sound_speed,
        "healing_length": result.healing_length,
        "splitting_plus": result.splitting_speeds[0],
        "splitting_minus": result.splitting_speeds[1],
        "pump_residual": result.pump_residual,
        "max_vg_rel_error": float(np.max(np.abs(
            result.v_measured[1:] / result.v_analytic[1:] - 1.0))),
    }


def _run_gem_echo(params, outdir: Path, rng) -> dict:
    p = dict(params)
    t_flip = p.pop("t_flip", 10.0)
    eta0 = p.pop("eta0", 30.0)
    pulse_t0 = p.pop("pulse_t0", 3.0)
    pulse_width = p.pop("pulse_width", 0.7)
    schedule = gem.gradient_schedule(t_flip, eta0)
    config = _dataclass_config(gem.GemConfig, {
        "od": p.pop("od", 0.6),
        "eta0": eta0,
        "gamma": p.pop("gamma", 0.0),
        "length": p.pop("length", 1.0),
        "t_final": p.pop("t_final", 2.5 * t_flip),
        "schedule": schedule,
        **p,
    })
    history, report = gem.gem_propagate(
        config, gem.gaussian_pulse(pulse_t0, pulse_width))
    gridio.write_timeseries_csv(outdir / "output_field.csv", history.t, history.output)
    diag = gem.kspace_polariton(history)
    good = np.isfinite(diag.drift_rate)
    gridio.write_csv(outdir / "kspace_centroid.csv", ["t", "centroid_k"],
                     [diag.t, diag.centroid])
    return {
        "efficiency": report.efficiency,
        "echo_peak_time": report.echo_peak_time,
        "expected_echo_time": 2.0 * t_flip - pulse_t0,
        "input_energy": report.input_energy,
        "echo_energy": report.echo_energy,
        "mean_drift_rate": float(np.nanmean(diag.drift_rate[good])) if good.any() else math.nan,
    }


def _run_ring_count(params, outdir: Path, rng) -> dict:
    config = _dataclass_config(experiments.RingCountConfig, params)
    result = experiments.ring_count_n2(config)
    gridio.write_csv(outdir / "rings.csv", ["intensity", "rings", "phase_over_2pi"],
                     [result.intensities, result.ring_counts, result.phase_over_2pi])
    return {
        "delta_n_rings": result.delta_n_rings,
        "delta_n_phase": result.delta_n_phase,
        "delta_n_configured": result.delta_n_configured,
        "flagged_frames": len(result.flagged),
    }


def _run_shockwave(params, outdir: Path, rng) -> dict:
    config = _dataclass_config(experiments.ShockConfig, params)
    result = experiments.shockwave_run(config)
    f = result.features
    gridio.write_csv(outdir / "features.csv",
                     ["z", "slope_onset", "maximum", "first_minimum"],
                     [f.z, f.slope_onset, f.maximum, f.first_minimum])
    z_end, radii, prof = result.profiles[-1]
    gridio.write_csv(outdir / "final_profile.csv", ["r", "density"], [radii, prof])
    return {
        "background": result.background,
        "final_center_density": result.final_center_density,
        "center_deficit": result.center_deficit,
        "noise_floor": result.noise_floor,
        **{f"exponent_{k}": v for k, v in result.exponents.items()},
    }


def _run_oam(params, outdir: Path, rng) -> dict:
    config = _dataclass_config(experiments.OamConfig, params)
    census = experiments.oam_injection(config)
    rows = np.arange(len(census.charges), dtype=float)
    pos = np.asarray(census.positions) if census.positions else np.zeros((0, 2))
    gridio.write_csv(outdir / "vortices.csv", ["index", "row", "col", "charge"],
                     [rows, pos[:, 0] if len(pos) else rows,
                      pos[:, 1] if len(pos) else rows,
                      np.asarray(census.charges, dtype=float)])
    return {
        "count": census.count,
        "net_charge": census.net_charge,
        "excluded": census.excluded,
        "injected_momentum": census.injected_momentum,
    }


def _run_defect(params, outdir: Path, rng) -> dict:
    config = _dataclass_config(experiments.DefectConfig, params)
    result = experiments.defect_scattering(config)
    return {
        "fringe_contrast": result.fringe_contrast,
        "ring_power": result.ring_power,
        "drag_x": float(result.drag[0]),
        "drag_y": float(result.drag[1]),
        "sound_speed": result.sound_speed,
        "flow_speed": result.flow_speed,
        "mach_angle_measured": result.mach_angle_measured,
        "mach_angle_expected": result.mach_angle_expected,
    }


EXPERIMENTS = {
    "bogoliubov_scan": ("pump+probe group-velocity scan reconstructing the "
                        "Bogoliubov dispersion", experiments.ProbeScanConfig,
                        _run_bogoliubov_scan),
    "gem_echo": ("gradient echo memory write/flip/recall with k-space "
                 "diagnostics", gem.GemConfig, _run_gem_echo),
    "ring_count": ("far-field ring counting estimate of the nonlinear index",
                   experiments.RingCountConfig, _run_ring_count),
    "shockwave": ("dispersive shockwave feature tracking in 1D or 2D",
                  experiments.ShockConfig, _run_shockwave),
    "oam_injection": ("orbital angular momentum injection and vortex census",
                      experiments.OamConfig, _run_oam),
    "defect_scattering": ("flow past a defect: fringes, Rayleigh ring, drag",
                          experiments.DefectConfig, _run_defect),
}


# ---------------------------------------------------------------------------
# Manifest and dispatch
# ---------------------------------------------------------------------------

def _config_hash(raw: dict) -> str:
    return hashlib.sha256(
        json.dumps(raw, sort_keys=True, default=str).encode()).hexdigest()


def _load_config(path: Path) -> dict:
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    if path.suffix == ".json":
        return json.loads(path.read_text())
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return str(obj)


def run_single(raw_config: dict, outdir: Path, seed: int, strict: bool = False) -> dict:
    """Execute one experiment config into ``outdir``; returns the manifest."""
    outdir.mkdir(parents=True, exist_ok=True)
    manifest = {
        "config_hash": _config_hash(raw_config),
        "tool_version": __version__,
        "seed": seed,
        "started_at": time.strftime("%Y-%m-%dT%H:%M:%S"),
        "finished_at": None,
        "effective_config": None,
        "outputs": [],
        "summary": None,
        "error": None,
    }
    manifest_path = outdir / "manifest.json"
    try:
        name = raw_config.get("experiment")
        if name not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {name!r}; see list-experiments")
        _desc, _schema, runner = EXPERIMENTS[name]
        params = dict(raw_config.get("params", {}))
        manifest["effective_config"] = {"experiment": name, "params": params,
                                        "seed": seed}
        rng = np.random.default_rng(seed)
        summary = runner(params, outdir, rng)
        manifest["summary"] = summary
        manifest["outputs"] = sorted(p.name for p in outdir.iterdir()
                                     if p.name != "manifest.json")
        return manifest
    except (ConfigError, PhotonFluidError, Exception) as exc:
        manifest["error"] = {
            "type": type(exc).__name__,
            "message": str(exc),
            "config_error": isinstance(exc, ConfigError),
        }
        raise
    finally:
        manifest["finished_at"] = time.strftime("%Y-%m-%dT%H:%M:%S")
        manifest["outputs"] = sorted(p.name for p in outdir.iterdir()
                                     if p.exists() and p.name != "manifest.json")
        manifest_path.write_text(json.dumps(manifest, indent=1, sort_keys=True,
                                            default=_json_default))


def _resolve_outdir(arg: str | None, default_name: str) -> Path:
    if arg:
        return Path(arg)
    root = os.environ.get(OUTPUT_ROOT_ENV, "runs")
    return Path(root) / default_name


def cmd_run(args) -> int:
    try:
        raw = _load_config(Path(args.config))
        outdir = _resolve_outdir(args.out, Path(args.config).stem)
        run_single(raw, outdir, args.seed, strict=args.strict)
        print(f"ok: outputs in {outdir}")
        return 0
    except ConfigError as exc:
        print(json.dumps({"error": "config", "message": str(exc)}), file=sys.stderr)
        return 2
    except PhotonFluidError as exc:
        print(json.dumps({"error": "engine", "message": str(exc)}), file=sys.stderr)
        return 1


def _expand_grid(raw: dict, cap: int):
    grid = raw.get("sweep", {}).get("grid", {})
    if not grid:
        return [({}, "point_000")]
    keys = sorted(grid)
    combos = list(itertools.product(*(grid[k] for k in keys)))
    if len(combos) > cap:
        raise ConfigError(f"sweep grid expands to {len(combos)} points, above the "
                          f"cap {cap}")
    out = []
    for i, combo in enumerate(combos):
        out.append((dict(zip(keys, combo)), f"point_{i:03d}"))
    return out


def _sweep_point(raw, overrides, subdir, seed):
    point_cfg = {"experiment": raw["experiment"],
                 "params": {**raw.get("params", {}), **overrides}}
    manifest = run_single(point_cfg, subdir, seed)
    return manifest["summary"]


def cmd_sweep(args) -> int:
    try:
        raw = _load_config(Path(args.config))
        outdir = _resolve_outdir(args.out, Path(args.config).stem + "_sweep")
        points = _expand_grid(raw, args.cap)
        outdir.mkdir(parents=True, exist_ok=True)

        results = {}
        pending = []
        for overrides, name in points:
            subdir = outdir / name
            manifest_path = subdir / "manifest.json"
            if manifest_path.exists():
                prev = json.loads(manifest_path.read_text())
                if prev.get("error") is None:
                    results[name] = (overrides, prev.get("summary") or {})
                    continue
            pending.append((overrides, name, subdir))

        if args.jobs > 1 and len(pending) > 1:
            with concurrent.futures.ProcessPoolExecutor(max_workers=args.jobs) as pool:
                futures = {
                    pool.submit(_sweep_point, raw, ov, sd, args.seed): (ov, nm)
                    for ov, nm, sd in pending}
                for fut in concurrent.futures.as_completed(futures):
                    ov, nm = futures[fut]
                    results[nm] = (ov, fut.result())
        else:
            for ov, nm, sd in pending:
                results[nm] = (ov, _sweep_point(raw, ov, sd, args.seed))

        names = sorted(results)
        grid_keys = sorted({k for ov, _s in results.values() for k in ov})
        summary_keys = sorted({k for _ov, s in results.values() for k in s})
        lines = [",".join(["point", *grid_keys, *summary_keys])]
        for nm in names:
            ov, s = results[nm]
            row = [nm]
            row += [repr(ov.get(k, "")) for k in grid_keys]
            row += [f"{s[k]:.17g}" if isinstance(s.get(k), float)
                    else str(s.get(k, "")) for k in summary_keys]
            lines.append(",".join(row))
        (outdir / "summary.csv").write_text("\n".join(lines) + "\n")
        print(f"ok: {len(names)} sweep points in {outdir}")
        return 0
    except ConfigError as exc:
        print(json.dumps({"error": "config", "message": str(exc)}), file=sys.stderr)
        return 2
    except PhotonFluidError as exc:
        print(json.dumps({"error": "engine", "message": str(exc)}), file=sys.stderr)
        return 1


def cmd_list(args) -> int:
    for name, (desc, schema, _runner) in sorted(EXPERIMENTS.items()):
        print(f"{name:20s} {desc}")
        print(f"{'':20s}   schema: {schema.__module__}.{schema.__name__}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="photonfluid",
        description="Atomic-vapor nonlinear optics and fluid-of-light runs")
    sub = parser.add_subparsers(dest="command")

    p_run = sub.add_parser("run", help="execute one experiment config")
    p_run.add_argument("config")
    p_run.add_argument("--out", default=None,
                       help=f"output directory (default: ${OUTPUT_ROOT_ENV}/<config name>)")
    p_run.add_argument("--seed", type=int, default=0)
    p_run.add_argument("--strict", action="store_true",
                       help="escalate validity warnings to errors")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="expand a [sweep.grid] table and run each point")
    p_sweep.add_argument("config")
    p_sweep.add_argument("--out", default=None)
    p_sweep.add_argument("--seed", type=int, default=0)
    p_sweep.add_argument("--jobs", type=int, default=1)
    p_sweep.add_argument("--cap", type=int, default=256)
    p_sweep.set_defaults(func=cmd_sweep)

    p_list = sub.add_parser("list-experiments", help="names, descriptions, schemas")
    p_list.set_defaults(func=cmd_list)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not getattr(args, "func", None):
        parser.print_usage()
        return 0
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
