"""Command-line scenario runner.

Configuration files are flat ``key = value`` text with ``#`` comments::

    gamma = 1.0
    eps = 0.1       # amplitude |p(v+) - p(v-)|
    t_end = 5

Every subcommand writes its CSV files and a ``manifest.json`` with the
resolved parameters into ``--out``.
"""

import argparse
import csv
import json
import math
import os
import platform
import sys
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from nsklab import __version__, kernels
from nsklab.constitutive import FluidParams
from nsklab.endstates import rh_residual, solve_end_states
from nsklab.errors import ConfigError, NSKError
from nsklab.fields import Grid

FLOAT_FMT = "%.17g"
COMMANDS = ("endstates", "profile", "simulate", "contraction", "npi", "limit",
            "sweep")


def _bool(text):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _floats(text):
    return tuple(float(t) for t in text.replace(",", " ").split())


def _opt_float(text):
    return None if text.strip().lower() in ("", "none", "auto") else float(text)


# key -> (parser, default); a default of None means "derived when needed"
SCHEMA = {
    "gamma": (float, 1.0),
    "alpha": (float, 0.0),
    "c": (float, 0.09),
    "b": (_opt_float, None),
    "strict": (_bool, True),
    "eps": (float, 0.1),
    "family": (int, 2),
    "v_minus": (float, 1.0),
    "u_minus": (float, 0.0),
    "lambda": (_opt_float, None),
    "delta0": (float, 0.4),
    "delta3": (float, 0.1),
    "L": (_opt_float, None),
    "n": (int, 2001),
    "t_end": (float, 1.0),
    "cfl": (float, 0.2),
    "dt": (_opt_float, None),
    "v_floor": (float, 1e-6),
    "stride": (int, 10),
    "perturbation": (str, "none"),
    "pert_amp_v": (float, 0.0),
    "pert_amp_h": (float, 0.0),
    "pert_width": (float, 1.0),
    "pert_center": (float, 0.0),
    "seed": (int, 0),
    "c1": (float, 1.0),
    "deltas": (_floats, (1e-2, 1e-3)),
    "samples": (int, 1000),
    "m": (int, 1024),
    "nus": (_floats, (0.4, 0.2, 0.1, 0.05)),
    "window": (_floats, (-2.0, 2.0)),
    "horizon": (float, 1.0),
    "n_times": (int, 11),
    "sweep_command": (str, "profile"),
    "sweep_key": (str, "eps"),
    "sweep_values": (_floats, ()),
}


@dataclass(frozen=True)
class RunConfig:
    """Resolved settings; ``raw`` keeps the unresolved values so derived
    defaults follow edits made through :meth:`with_value`."""

    raw: dict
    values: dict

    def __getitem__(self, key):
        return self.values[key]

    def with_value(self, key, value):
        if key not in SCHEMA:
            raise ConfigError(f"unknown key {key!r}")
        raw = dict(self.raw)
        raw[key] = value
        return validate(raw)

    def fluid(self):
        v = self.values
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return FluidParams(v["gamma"], v["alpha"], v["c"], v["b"],
                               v["strict"])

    def resolved(self):
        """JSON-friendly copy, with derived values filled in."""
        out = {}
        for k, val in self.values.items():
            out[k] = list(val) if isinstance(val, tuple) else val
        return out


def parse_config(text):
    """Parse flat ``key = value`` text into a validated :class:`RunConfig`."""
    seen = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in SCHEMA:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in seen:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        parser = SCHEMA[key][0]
        try:
            seen[key] = parser(value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from None
    vals = {k: d for k, (_, d) in SCHEMA.items()}
    vals.update(seen)
    return validate(vals)


def validate(vals):
    """Fill derived defaults and re-check every constraint."""
    from nsklab.contraction import default_lambda
    raw = dict(vals)
    vals = dict(vals)
    # surfaces the constitutive hypotheses with the violated inequality named
    FluidParams(vals["gamma"], vals["alpha"], vals["c"], vals["b"], vals["strict"])
    if vals["family"] not in (1, 2):
        raise ConfigError("family must be 1 or 2")
    if not vals["eps"] > 0:
        raise ConfigError("eps must be positive")
    if vals["lambda"] is None:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            vals["lambda"] = default_lambda(vals["eps"], vals["delta0"])
    if vals["L"] is None:
        vals["L"] = 14.0 / vals["eps"]
    if vals["n"] < 16:
        raise ConfigError("n must be at least 16")
    if not 0 < vals["cfl"] <= 0.5:
        raise ConfigError("cfl must lie in (0, 0.5]")
    if vals["dt"] is not None and not vals["dt"] > 0:
        raise ConfigError("dt must be positive")
    if vals["stride"] < 1:
        raise ConfigError("stride must be at least 1")
    if vals["m"] < 2 or vals["m"] % 2:
        raise ConfigError("m must be a positive even integer")
    if len(vals["window"]) != 2 or not vals["window"][0] < vals["window"][1]:
        raise ConfigError("window must be two increasing numbers")
    if any(not 0 < d < 0.5 for d in vals["deltas"]):
        raise ConfigError("deltas must lie in (0, 0.5)")
    if vals["sweep_command"] not in COMMANDS[:-1]:
        raise ConfigError(f"sweep_command must be one of {COMMANDS[:-1]}")
    if vals["sweep_key"] not in SCHEMA:
        raise ConfigError(f"unknown sweep_key {vals['sweep_key']!r}")
    return RunConfig(raw, vals)


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return FLOAT_FMT % x
    return str(x)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) for x in row])
    return {"file": os.path.basename(path), "columns": list(header)}


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        return float(x) if math.isfinite(x) else str(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def write_manifest(out, command, cfg, outputs, summary, started):
    manifest = {
        "command": command,
        "version": __version__,
        "kernel_backend": kernels.BACKEND,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "wall_time_s": time.time() - started,
        "config": cfg.resolved(),
        "fluid": cfg.fluid().describe(),
        "outputs": outputs,
        "summary": summary,
    }
    with open(os.path.join(out, "manifest.json"), "w") as fh:
        json.dump(_jsonable(manifest), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _shock(cfg):
    return solve_end_states(cfg["v_minus"], cfg["u_minus"], cfg["eps"],
                            cfg["family"], cfg.fluid())


def _grid(cfg):
    return Grid(cfg["L"], cfg["n"])


def _profile(cfg, shock=None):
    from nsklab.profile import compute_profile
    shock = shock or _shock(cfg)
    return compute_profile(shock, cfg.fluid(), grid=_grid(cfg))


def _perturbation(cfg):
    from nsklab.solver import Perturbation
    return Perturbation(cfg["perturbation"], cfg["pert_amp_v"],
                        cfg["pert_amp_h"], cfg["pert_width"], cfg["pert_center"])


def _solver_config(cfg, **kw):
    from nsklab.solver import SolverConfig
    base = dict(cfl=cfg["cfl"], v_floor=cfg["v_floor"], t_end=cfg["t_end"],
                stride=cfg["stride"], dt=cfg["dt"])
    base.update(kw)
    return SolverConfig(**base)


def cmd_endstates(cfg, out):
    params = cfg.fluid()
    sh = _shock(cfg)
    r1, r2 = rh_residual(sh, params)
    record = dict(sh.as_dict(), rh_r1=r1, rh_r2=r2)
    for k, v in record.items():
        print(f"{k}={_fmt(v)}")
    header = list(record)
    return [write_csv(os.path.join(out, "endstates.csv"), header,
                      [[record[k] for k in header]])], record


def cmd_profile(cfg, out):
    from nsklab.profile import validate_profile
    prof = _profile(cfg)
    cols = prof.to_columns()
    header = ["xi", "v", "h", "u", "dv", "dh", "d2v"]
    rows = zip(*(cols[k] for k in header))
    report = validate_profile(prof)
    return [write_csv(os.path.join(out, "profile.csv"), header, rows)], report


def cmd_simulate(cfg, out):
    from nsklab.solver import initial_state, simulate
    params = cfg.fluid()
    prof = _profile(cfg)
    sh = prof.shock
    s0 = initial_state(prof, _perturbation(cfg))
    traj = simulate(s0, params, sh, _solver_config(cfg))
    rows = []
    for st in traj.states:
        rows.extend((st.t, x, v, h) for x, v, h in zip(st.grid.nodes, st.v, st.h))
    dev = max(float(np.max(np.abs(st.v - prof.vt))) for st in traj.states)
    summary = {"n_steps": traj.n_steps, "dt_min": traj.dt_min,
               "dt_max": traj.dt_max, "max_abs_v_minus_profile": dev,
               "n_snapshots": len(traj.states)}
    return [write_csv(os.path.join(out, "snapshots.csv"), ["t", "xi", "v", "h"],
                      rows)], summary


TIMESERIES = ("t", "X", "Xdot", "E_weighted", "Y", "Y_g", "Y_b", "Y_l", "Y_s",
              "J_bad", "J_good", "P1", "P2", "G_p", "G_h_minus", "G_h_plus",
              "D_h", "D_p", "boundary_tail_bound")


def run_contraction(cfg):
    from nsklab.contraction import ContractionMonitor, WeightSpec
    from nsklab.solver import initial_state, simulate
    params = cfg.fluid()
    prof = _profile(cfg)
    spec = WeightSpec(cfg["lambda"], prof.shock.eps, prof)
    mon = ContractionMonitor(prof, spec, cfg["delta3"])
    s0 = initial_state(prof, _perturbation(cfg))
    simulate(s0, params, prof.shock, _solver_config(cfg, stride=10 ** 9),
             monitor=mon)
    return mon


def cmd_contraction(cfg, out):
    mon = run_contraction(cfg)
    rows = []
    stride = cfg["stride"]
    idx = list(range(0, len(mon.times), stride))
    if idx[-1] != len(mon.times) - 1:
        idx.append(len(mon.times) - 1)
    for i in idx:
        r = mon.reports[i]
        rows.append([mon.times[i]] + [getattr(r, k) for k in TIMESERIES[1:]])
    summary = mon.summary()
    gap = mon.identity_gap()
    summary["identity_gap_max"] = float(np.max(np.abs(gap))) if gap.size else 0.0
    return [write_csv(os.path.join(out, "timeseries.csv"), TIMESERIES, rows)], summary


def cmd_npi(cfg, out):
    from nsklab.npi import npi_campaign
    rep = npi_campaign(cfg["c1"], cfg["deltas"], cfg["samples"], cfg["seed"],
                       cfg["m"])
    outputs = [write_csv(os.path.join(out, "npi.csv"),
                         ["sample_id", "delta", "L2_of_W", "R_value"], rep.rows)]
    outputs.append(write_csv(
        os.path.join(out, "npi_offenders.csv"),
        ["sample_id", "delta", "R_value", "tolerance", "coefficients"],
        [(i, d, r, tol, " ".join(FLOAT_FMT % c for c in coef))
         for i, d, r, tol, coef in rep.offenders]))
    top_rows = [(d, rank, sid, val) for d in rep.deltas
                for rank, (val, sid) in enumerate(rep.top[d])]
    outputs.append(write_csv(os.path.join(out, "npi_top.csv"),
                             ["delta", "rank", "sample_id", "R_value"], top_rows))
    summary = {"max_R": {str(d): v for d, v in rep.max_R.items()},
               "n_offenders": len(rep.offenders),
               "largest_clean_delta": rep.largest_clean_delta}
    return outputs, summary


def cmd_limit(cfg, out):
    from nsklab.limits import ladder
    params = cfg.fluid()
    prof = _profile(cfg)
    rep, run = ladder(prof, params, _grid(cfg), nus=cfg["nus"],
                      window=cfg["window"], horizon=cfg["horizon"],
                      n_times=cfg["n_times"],
                      config=_solver_config(cfg), lam=cfg["lambda"],
                      delta3=cfg["delta3"])
    header = ["nu", "t", "L1_window_distance", "dq_ac", "kinetic_part",
              "X_nu", "X_drift"]
    summary = {"final_L1": {str(k): v for k, v in rep.final_l1.items()},
               "strictly_decreasing": rep.strictly_decreasing(),
               "fitted_C": rep.fitted_constant(),
               "profile_L1_mass": rep.profile_mass,
               "max_drift": {str(k): v for k, v in rep.max_drift.items()}}
    return [write_csv(os.path.join(out, "limit.csv"), header, rep.rows)], summary


HANDLERS = {"endstates": cmd_endstates, "profile": cmd_profile,
            "simulate": cmd_simulate, "contraction": cmd_contraction,
            "npi": cmd_npi, "limit": cmd_limit}


def cmd_sweep(cfg, out, threads=1):
    command = cfg["sweep_command"]
    key = cfg["sweep_key"]
    values = cfg["sweep_values"]
    if not values:
        raise ConfigError("sweep needs sweep_values")
    parser = SCHEMA[key][0]

    def one(i_val):
        i, val = i_val
        sub = os.path.join(out, f"run_{i:03d}")
        os.makedirs(sub, exist_ok=True)
        run_cfg = cfg.with_value(key, parser(repr(val)))
        started = time.time()
        outputs, summary = HANDLERS[command](run_cfg, sub)
        write_manifest(sub, command, run_cfg, outputs, summary, started)
        return {"run": os.path.basename(sub), key: val, "status": "ok"}

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        results = list(pool.map(one, enumerate(values)))
    rows = [(r["run"], r[key], r["status"]) for r in results]
    return [write_csv(os.path.join(out, "sweep.csv"), ["run", key, "status"],
                      rows)], {"runs": len(results)}


def build_parser():
    ap = argparse.ArgumentParser(prog="nsklab", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="flat key = value configuration file")
    ap.add_argument("--out", default=".", help="output directory")
    ap.add_argument("--seed", type=int, help="override the config seed")
    ap.add_argument("--threads", type=int, default=1,
                    help="worker threads for sweep")
    return ap


def run(command, cfg, out, threads=1):
    os.makedirs(out, exist_ok=True)
    started = time.time()
    if command == "sweep":
        outputs, summary = cmd_sweep(cfg, out, threads)
    else:
        outputs, summary = HANDLERS[command](cfg, out)
    write_manifest(out, command, cfg, outputs, summary, started)
    return summary


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        text = ""
        if args.config:
            try:
                with open(args.config, encoding="utf-8") as fh:
                    text = fh.read()
            except OSError as exc:
                raise ConfigError(f"cannot read config: {exc}") from None
        cfg = parse_config(text)
        if args.seed is not None:
            cfg = cfg.with_value("seed", args.seed)
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        run(args.command, cfg, args.out, args.threads)
    except NSKError as exc:
        print(f"nsklab: error: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
