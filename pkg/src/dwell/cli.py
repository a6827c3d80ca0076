"""Command-line front end: ``dwell <mode> --config run.json --out data.csv``.

Configs are flat JSON documents whose keys mirror :class:`RunConfig` and the
:class:`~dwell.gaussian.ModelParams` fields; an optional ``sweep`` object
``{"param": ..., "min": ..., "max": ..., "count": ...}`` scans one parameter.
Output is CSV with ``#`` comment lines carrying the engine version and the
config echo.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields

import numpy as np

from . import __version__
from .closed import closed_covariance
from .dissipative import evolve, find_thermalisation_times, local_occupations_at, state_at, steady_state
from .errors import DwellError, IntegrationError
from .fock import MAX_CUTOFF, extract_covariance, fluxes_fock, iter_fock
from .gaussian import COV_COLUMNS, ModelParams, occupations, upper_triangle
from .measures import LocalThermal, gaussian_discord, log_negativity, max_fidelity_thermal
from .thermo import fluxes_from_trajectory

MODES = ("closed", "open", "steady", "discord", "flux", "thermal-times", "fidelity-scan", "fock")
PARAM_FIELDS = tuple(f.name for f in fields(ModelParams))
RUN_FIELDS = ("mode", "t_max", "dt_out", "cutoff", "target_kind", "sweep")
SWEEP_FIELDS = ("param", "min", "max", "count")
NEEDS_TIME = {"closed", "open", "flux", "fidelity-scan", "fock"}

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3


class ConfigError(DwellError):
    def __init__(self, diagnostics):
        super().__init__("; ".join(diagnostics))
        self.diagnostics = list(diagnostics)


@dataclass(frozen=True)
class Sweep:
    param: str
    min: float
    max: float
    count: int

    def values(self) -> list[float]:
        return [float(v) for v in np.linspace(self.min, self.max, self.count)]


@dataclass(frozen=True)
class RunConfig:
    mode: str
    params: ModelParams
    t_max: float | None = None
    dt_out: float | None = None
    cutoff: int | None = None
    target_kind: str | None = None
    sweep: Sweep | None = None

    def to_dict(self) -> dict:
        out = {"mode": self.mode}
        out.update({name: getattr(self.params, name) for name in PARAM_FIELDS})
        for name in ("t_max", "dt_out", "cutoff", "target_kind"):
            value = getattr(self, name)
            if value is not None:
                out[name] = value
        if self.sweep is not None:
            out["sweep"] = {name: getattr(self.sweep, name) for name in SWEEP_FIELDS}
        return out

    def at(self, name: str, value: float) -> RunConfig:
        """Copy with one sweep coordinate substituted."""
        if name == "t_max":
            return RunConfig(self.mode, self.params, value, self.dt_out, self.cutoff,
                             self.target_kind, None)
        return RunConfig(self.mode, self.params.replace(**{name: value}), self.t_max,
                         self.dt_out, self.cutoff, self.target_kind, None)


def _is_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)


def _check_params(values: dict, where: str = "") -> list[str]:
    diags = []
    for name in ("gamma1", "gamma2", "nbar1", "nbar2"):
        if name in values and values[name] < 0:
            diags.append(f"{name} must be ≥ 0{where}")
    if "delta" in values and values["delta"] <= -1:
        diags.append(f"delta must be > -1{where}")
    return diags


def validate_config(raw) -> list[str]:
    """Line-oriented diagnostics for a config document; empty when valid."""
    if not isinstance(raw, dict):
        return ["config must be a JSON object"]
    diags = []
    for key in raw:
        if key not in PARAM_FIELDS and key not in RUN_FIELDS:
            diags.append(f"unknown field '{key}'")

    mode = raw.get("mode")
    if mode is None:
        diags.append("missing field 'mode'")
    elif mode not in MODES:
        diags.append(f"mode must be one of {', '.join(MODES)}")

    numeric = {}
    for key in PARAM_FIELDS + ("t_max", "dt_out"):
        if key in raw:
            if _is_number(raw[key]):
                numeric[key] = float(raw[key])
            else:
                diags.append(f"{key} must be a finite number")
    diags += _check_params(numeric)
    for key in ("t_max", "dt_out"):
        if key in numeric and numeric[key] <= 0:
            diags.append(f"{key} must be > 0")

    if "cutoff" in raw:
        cutoff = raw["cutoff"]
        if not isinstance(cutoff, int) or isinstance(cutoff, bool) or not 2 <= cutoff <= MAX_CUTOFF:
            diags.append(f"cutoff must be an integer in [2, {MAX_CUTOFF}]")
    if "target_kind" in raw and raw["target_kind"] not in ("global", "local"):
        diags.append("target_kind must be 'global' or 'local'")

    sweep = raw.get("sweep")
    sweep_axis = None
    if sweep is not None:
        if not isinstance(sweep, dict):
            diags.append("sweep must be an object with param, min, max, count")
        else:
            for key in sweep:
                if key not in SWEEP_FIELDS:
                    diags.append(f"unknown sweep field '{key}'")
            for key in SWEEP_FIELDS:
                if key not in sweep:
                    diags.append(f"missing sweep field '{key}'")
            sweep_axis = sweep.get("param")
            if sweep_axis is not None and sweep_axis not in PARAM_FIELDS + ("t_max",):
                diags.append("sweep param must be a model parameter or t_max")
                sweep_axis = None
            count = sweep.get("count")
            if "count" in sweep and (not isinstance(count, int) or isinstance(count, bool) or count < 1):
                diags.append("sweep count must be a positive integer")
            lo, hi = sweep.get("min"), sweep.get("max")
            if ("min" in sweep and not _is_number(lo)) or ("max" in sweep and not _is_number(hi)):
                diags.append("sweep min and max must be finite numbers")
            elif lo is not None and hi is not None:
                if lo > hi:
                    diags.append("sweep min must not exceed max")
                elif sweep_axis is not None:
                    diags += _check_params({sweep_axis: lo}, " (sweep min)")
                    if sweep_axis == "t_max" and lo <= 0:
                        diags.append("t_max must be > 0 (sweep min)")

    if mode in MODES:
        diags += _mode_diagnostics(mode, raw, numeric, sweep_axis)
    return diags


def _mode_diagnostics(mode, raw, numeric, sweep_axis) -> list[str]:
    diags = []

    def need(key):
        if key not in raw and not (key == "t_max" and sweep_axis == "t_max"):
            diags.append(f"{mode} mode requires field '{key}'")

    def value(key):
        return numeric.get(key, 0.0)

    if mode in NEEDS_TIME:
        need("t_max")
        need("dt_out")
    if mode != "fock" and (value("u") != 0 or sweep_axis == "u"):
        diags.append(f"{mode} mode requires u = 0 (use fock mode for interactions)")
    if mode == "fock":
        need("cutoff")
    elif mode == "closed":
        if value("gamma1") != 0 or value("gamma2") != 0 or sweep_axis in ("gamma1", "gamma2"):
            diags.append("closed mode requires gamma1 = gamma2 = 0")
    elif mode == "fidelity-scan":
        need("target_kind")
    elif mode == "discord":
        if "sweep" not in raw:
            diags.append("discord mode requires field 'sweep'")
        timed = "t_max" in raw or sweep_axis == "t_max"
        if not timed and value("gamma1") == 0 and value("gamma2") == 0 and sweep_axis not in ("gamma1", "gamma2"):
            diags.append("discord mode without t_max needs damping for a steady state")
    elif mode == "steady":
        if value("gamma1") == 0 and value("gamma2") == 0:
            diags.append("steady mode requires gamma1 or gamma2 > 0")
    elif mode == "thermal-times":
        need("t_max")
        if value("gamma1") <= 0 or value("gamma1") != value("gamma2"):
            diags.append("thermal-times mode requires gamma1 = gamma2 > 0")
        if value("j") <= 0:
            diags.append("thermal-times mode requires j > 0")
        if value("delta") != 0:
            diags.append("thermal-times mode requires delta = 0")
        if sweep_axis in ("gamma1", "gamma2", "delta"):
            diags.append(f"thermal-times mode cannot sweep {sweep_axis}")
    return diags


def parse_config(raw: dict) -> RunConfig:
    diags = validate_config(raw)
    if diags:
        raise ConfigError(diags)
    params = ModelParams(**{k: float(raw[k]) for k in PARAM_FIELDS if k in raw})
    sweep = None
    if "sweep" in raw:
        s = raw["sweep"]
        sweep = Sweep(s["param"], float(s["min"]), float(s["max"]), int(s["count"]))
    return RunConfig(
        mode=raw["mode"],
        params=params,
        t_max=float(raw["t_max"]) if "t_max" in raw else None,
        dt_out=float(raw["dt_out"]) if "dt_out" in raw else None,
        cutoff=raw.get("cutoff"),
        target_kind=raw.get("target_kind"),
        sweep=sweep,
    )


def load_config(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError([f"cannot read config: {exc.strerror}"]) from exc
    except json.JSONDecodeError as exc:
        raise ConfigError([f"invalid JSON at line {exc.lineno}: {exc.msg}"]) from exc


# --- per-mode row producers -------------------------------------------------


def _trajectory_rows(cfg: RunConfig, covs, times):
    rows = []
    for t, cov in zip(times, covs):
        rows.append([t, *upper_triangle(cov), *occupations(cov)])
    return rows


def _closed(cfg):
    from .integrate import sample_count

    times = cfg.dt_out * np.arange(sample_count(cfg.t_max, cfg.dt_out))
    covs = [closed_covariance(cfg.params, t) for t in times]
    return ["t", *COV_COLUMNS, "nbar1_eff", "nbar2_eff"], _trajectory_rows(cfg, covs, times)


def _open(cfg):
    traj = evolve(cfg.params, cfg.t_max, cfg.dt_out)
    return (["t", *COV_COLUMNS, "nbar1_eff", "nbar2_eff"],
            _trajectory_rows(cfg, traj.covariances, traj.times))


def _steady(cfg):
    cov = steady_state(cfg.params)
    return ([*COV_COLUMNS, "discord", "log_negativity"],
            [[*upper_triangle(cov), gaussian_discord(cov).value, log_negativity(cov)]])


def _discord(cfg):
    if cfg.t_max is None:
        cov = steady_state(cfg.params)
    else:
        cov = state_at(cfg.params, cfg.t_max).cov
    res = gaussian_discord(cov)
    return ["discord", "branch"], [[res.value, res.branch]]


def _flux(cfg):
    traj = evolve(cfg.params, cfg.t_max, cfg.dt_out)
    recs = fluxes_from_trajectory(traj)
    return (["t", "qdot1", "qdot2", "qdot_tot", "q_tot"],
            [[r.t, r.qdot1, r.qdot2, r.qdot_tot, r.q_tot] for r in recs])


def _thermal_times(cfg):
    p = cfg.params
    rows = []
    for k, t in enumerate(find_thermalisation_times(p.gamma1, p.j, cfg.t_max)):
        rows.append([k, t, *local_occupations_at(p, t)])
    return ["root_index", "t_root", "nbar1_eff", "nbar2_eff"], rows


def _fidelity_scan(cfg):
    traj = evolve(cfg.params, cfg.t_max, cfg.dt_out)
    rows = []
    for t, state in zip(traj.times, traj.states):
        target, f = max_fidelity_thermal(state.cov, cfg.target_kind)
        if isinstance(target, LocalThermal):
            rows.append([t, f, target.mu1, target.mu2])
        else:
            rows.append([t, f, target.mu])
    cols = ["t", "best_f", "mu1", "mu2"] if cfg.target_kind == "local" else ["t", "best_f", "mu"]
    return cols, rows


def _fock(cfg):
    rows = []
    for t, state in iter_fock(cfg.params, cfg.cutoff, cfg.t_max, cfg.dt_out, strict=True):
        cov = extract_covariance(state).cov
        try:
            disc = gaussian_discord(cov).value
        except DwellError as exc:
            raise IntegrationError(f"extracted covariance unusable: {exc}", t) from exc
        flux = fluxes_fock([(t, state)], cfg.params)[0]
        n1, n2 = occupations(cov)
        rows.append([t, state.trace_error, n1, n2, disc, flux.qdot1, flux.qdot2, flux.qdot_tot])
    return ["t", "trace_error", "nbar1", "nbar2", "discord_of_extracted_cov",
            "qdot1", "qdot2", "qdot_tot"], rows


PRODUCERS = {
    "closed": _closed,
    "open": _open,
    "steady": _steady,
    "discord": _discord,
    "flux": _flux,
    "thermal-times": _thermal_times,
    "fidelity-scan": _fidelity_scan,
    "fock": _fock,
}


def worker_count() -> int:
    env = os.environ.get("DWELL_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def produce(cfg: RunConfig) -> tuple[list[str], list[list]]:
    """Columns and rows for a config, sweep points in sweep order."""
    producer = PRODUCERS[cfg.mode]
    if cfg.sweep is None:
        return producer(cfg)
    axis = cfg.sweep.param
    values = cfg.sweep.values()
    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        results = list(pool.map(lambda v: producer(cfg.at(axis, v)), values))
    columns = [axis, *results[0][0]]
    rows = [[v, *row] for v, (_, block) in zip(values, results) for row in block]
    return columns, rows


def format_value(value) -> str:
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return repr(float(value))


def render_csv(cfg: RunConfig, columns, rows) -> str:
    engine = "fock" if cfg.mode == "fock" else "gaussian"
    lines = [
        f"# dwell {__version__} engine={engine}",
        "# config: " + json.dumps(cfg.to_dict(), sort_keys=True),
        ",".join(columns),
    ]
    lines += [",".join(format_value(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def read_config_echo(path) -> RunConfig:
    """Parse the config echoed into a CSV produced by :func:`run`."""
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("# config: "):
                return parse_config(json.loads(line[len("# config: "):]))
    raise ConfigError(["no config echo found"])


def run(config: RunConfig, out_path) -> int:
    """Execute a config and write its CSV; returns the process exit status."""
    try:
        columns, rows = produce(config)
    except IntegrationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(f"failed at t={exc.time!r}", file=sys.stderr)
        return EXIT_NUMERICAL
    except DwellError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(render_csv(config, columns, rows))
    return EXIT_OK


def validate(config_path) -> int:
    try:
        diags = validate_config(load_config(config_path))
    except ConfigError as exc:
        diags = exc.diagnostics
    if diags:
        for line in diags:
            print(line)
        return EXIT_CONFIG
    print("ok")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dwell", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"dwell {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for mode in MODES:
        p = sub.add_parser(mode, help=f"run a {mode} computation")
        p.add_argument("--config", required=True)
        p.add_argument("--out", required=True)
    p = sub.add_parser("validate", help="check a config without running it")
    p.add_argument("--config", required=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "validate":
        return validate(args.config)
    try:
        raw = load_config(args.config)
        if isinstance(raw, dict):
            if raw.get("mode", args.command) != args.command:
                raise ConfigError([f"config mode '{raw['mode']}' does not match command '{args.command}'"])
            raw = {**raw, "mode": args.command}
        config = parse_config(raw)
    except ConfigError as exc:
        for line in exc.diagnostics:
            print(line, file=sys.stderr)
        return EXIT_CONFIG
    return run(config, args.out)


if __name__ == "__main__":
    sys.exit(main())
