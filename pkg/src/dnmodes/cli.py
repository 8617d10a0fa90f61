"""Command-line front end.

    dnm <analyze|classify|simulate|sweep> --config cfg.json [--out base]
        [--larmor] [--dt x] [--samples n]

Configs are JSON with a top-level ``"schema": 1``; unknown fields are
rejected (fail-closed).  Exit codes: 0 success, 2 config error, 3 preset
domain error, 4 divergence (partial output kept with a ``.partial``
suffix).  ``DNM_THREADS`` caps sweep parallelism.  Output is byte-identical
across repeated runs of the same config.
"""

from __future__ import annotations

import argparse
import copy
import json
import os
import sys as _sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .dynamics import (
    IntegratorSpec,
    frame_equivalence_check,
    integrate_lab,
    integrate_modes,
    write_trajectory_csv,
)
from .errors import ConfigError, DivergenceError, DnmError, PresetDomainError, ScheduleDomainError
from .modes import classify_separability, decompose_at
from .presets import build_preset
from .quadratic import PhasePoint

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PRESET = 3
EXIT_DIVERGENCE = 4

_TOP_KEYS = {
    "schema",
    "preset",
    "window",
    "samples",
    "integrator",
    "initial_state",
    "output",
    "tolerances",
    "sweep",
}
_REQUIRED_KEYS = {"schema", "preset", "window"}


def _fmt(x) -> str:
    return format(float(x), ".17g")


def load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    validate_config(cfg)
    return cfg


def _require_keys(obj: dict, allowed: set, required: set, where: str) -> None:
    if not isinstance(obj, dict):
        raise ConfigError(f"{where} must be an object")
    unknown = set(obj) - allowed
    if unknown:
        raise ConfigError(f"unknown fields {sorted(unknown)} in {where}")
    missing = required - set(obj)
    if missing:
        raise ConfigError(f"missing fields {sorted(missing)} in {where}")


def validate_config(cfg: dict) -> None:
    _require_keys(cfg, _TOP_KEYS, _REQUIRED_KEYS, "config")
    if cfg["schema"] != 1:
        raise ConfigError(f"unsupported schema {cfg['schema']!r}; expected 1")
    window = cfg["window"]
    if (
        not isinstance(window, (list, tuple))
        or len(window) != 2
        or not window[0] < window[1]
    ):
        raise ConfigError("window must be [t0, t1] with t0 < t1")
    if "samples" in cfg and (not isinstance(cfg["samples"], int) or cfg["samples"] < 2):
        raise ConfigError("samples must be an integer >= 2")
    if "integrator" in cfg:
        _require_keys(cfg["integrator"], {"method", "dt"}, {"dt"}, "integrator")
    if "output" in cfg:
        _require_keys(cfg["output"], {"path", "format"}, set(), "output")
        if cfg["output"].get("format", "csv") not in ("csv", "json"):
            raise ConfigError("output format must be 'csv' or 'json'")
    if "tolerances" in cfg:
        _require_keys(cfg["tolerances"], {"tol_sep", "tol_cond"}, set(), "tolerances")
    if "initial_state" in cfg:
        state = cfg["initial_state"]
        if state != "equilibrium":
            _require_keys(state, {"q", "p"}, {"q", "p"}, "initial_state")
            if len(state["q"]) != 2 or len(state["p"]) != 2:
                raise ConfigError("initial_state q and p must each have two entries")
    if "sweep" in cfg:
        _require_keys(cfg["sweep"], {"axes"}, {"axes"}, "sweep")
        axes = cfg["sweep"]["axes"]
        if not isinstance(axes, list) or not 1 <= len(axes) <= 2:
            raise ConfigError("sweep.axes must list one or two axes")
        for ax in axes:
            _require_keys(ax, {"path", "values"}, {"path", "values"}, "sweep axis")
            if not isinstance(ax["values"], list) or not ax["values"]:
                raise ConfigError("sweep axis values must be a nonempty list")


def _out_base(cfg: dict, out_arg) -> str:
    if out_arg:
        return out_arg
    return cfg.get("output", {}).get("path", "dnm_out")


def _analysis_rows(cfg: dict, samples: int) -> list:
    sys_ = build_preset(cfg["preset"])
    t0, t1 = cfg["window"]
    times = np.linspace(t0, t1, samples)
    rows = []
    branch = None
    for t in times:
        dec = decompose_at(sys_, float(t), branch_ref=branch)
        branch = dec.theta
        q_eq = sys_.equilibrium(float(t))
        r1 = 1.0 / dec.omega1_sq**0.5 if dec.omega1_sq > 0 else float("nan")
        r2 = 1.0 / dec.omega2_sq**0.5 if dec.omega2_sq > 0 else float("nan")
        rows.append(
            (t, dec.theta, dec.theta_dot, dec.omega1_sq, dec.omega2_sq, r1, r2, *q_eq)
        )
    return rows


def cmd_analyze(cfg: dict, out_base: str, samples) -> int:
    n = samples or cfg.get("samples", 200)
    rows = _analysis_rows(cfg, n)
    path = out_base + "_analyze.csv"
    with open(path, "w", newline="") as fh:
        fh.write("t,theta,theta_dot,omega1_sq,omega2_sq,ellipse_r1,ellipse_r2,q1_eq,q2_eq\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    print(path)
    return EXIT_OK


def cmd_classify(cfg: dict, samples) -> int:
    sys_ = build_preset(cfg["preset"])
    tol_sep = cfg.get("tolerances", {}).get("tol_sep", 1e-9)
    n = samples or cfg.get("samples", 200)
    rep = classify_separability(sys_, tuple(cfg["window"]), n_samples=n, tol_sep=tol_sep)
    print(
        json.dumps(
            {
                "separable": rep.separable,
                "max_abs_theta_dot": rep.max_abs_theta_dot,
                "stability": rep.stability,
                "analytic_case": rep.analytic_case,
            },
            sort_keys=True,
        )
    )
    return EXIT_OK


def _initial_point(cfg: dict, sys_, t0: float) -> PhasePoint:
    state = cfg.get("initial_state", "equilibrium")
    if state == "equilibrium":
        return PhasePoint(t=t0, q=sys_.equilibrium(t0), p=(0.0, 0.0), frame="lab")
    return PhasePoint(t=t0, q=tuple(state["q"]), p=tuple(state["p"]), frame="lab")


def cmd_simulate(cfg: dict, out_base: str, dt, larmor: bool) -> int:
    sys_ = build_preset(cfg["preset"])
    t0, t1 = cfg["window"]
    step = dt or cfg.get("integrator", {}).get("dt", 1e-3)
    method = cfg.get("integrator", {}).get("method", "rk4")
    spec = IntegratorSpec(dt=step, t0=t0, t1=t1, method=method)
    x0 = _initial_point(cfg, sys_, t0)
    try:
        lab = integrate_lab(sys_, x0, spec)
    except DivergenceError as exc:
        if exc.partial is not None:
            write_trajectory_csv(exc.partial, out_base + "_lab.csv.partial")
        raise
    mode_spec = spec if method == "rk4" else IntegratorSpec(dt=step, t0=t0, t1=t1)
    report = frame_equivalence_check(sys_, x0, mode_spec)
    mapped0 = report.mapped.point(0)
    try:
        mode = integrate_modes(
            sys_, mapped0, mode_spec, apply_larmor=larmor,
            theta0=decompose_at(sys_, t0).theta,
        )
    except DivergenceError as exc:
        if exc.partial is not None:
            write_trajectory_csv(exc.partial, out_base + "_mode.csv.partial")
        raise
    write_trajectory_csv(lab, out_base + "_lab.csv")
    write_trajectory_csv(mode, out_base + "_mode.csv")
    sidecar = {
        "frame_equivalence_max_deviation": report.max_deviation,
        "trajectory_scale": report.scale,
        "dt": step,
        "larmor": larmor,
    }
    with open(out_base + "_report.json", "w", newline="") as fh:
        fh.write(json.dumps(sidecar, sort_keys=True) + "\n")
    print(out_base + "_report.json")
    return EXIT_OK


def _set_path(cfg: dict, dotted: str, value) -> None:
    node = cfg
    parts = dotted.split(".")
    for key in parts[:-1]:
        node = node[int(key)] if key.lstrip("-").isdigit() else node[key]
    last = parts[-1]
    if last.lstrip("-").isdigit() and isinstance(node, list):
        node[int(last)] = value
    else:
        if not isinstance(node, dict) or last not in node:
            raise ConfigError(f"sweep path {dotted!r} not found in config")
        node[last] = value


def cmd_sweep(cfg: dict, out_base: str, samples) -> int:
    if "sweep" not in cfg:
        raise ConfigError("sweep command needs a 'sweep' section in the config")
    axes = cfg["sweep"]["axes"]
    n = samples or cfg.get("samples", 200)
    tol_sep = cfg.get("tolerances", {}).get("tol_sep", 1e-9)
    grid = [(i,) for i in range(len(axes[0]["values"]))]
    if len(axes) == 2:
        grid = [(i, j) for (i,) in grid for j in range(len(axes[1]["values"]))]

    def run_point(idx):
        point_cfg = copy.deepcopy(cfg)
        for ax, i in zip(axes, idx):
            _set_path(point_cfg, ax["path"], ax["values"][i])
        sys_ = build_preset(point_cfg["preset"])
        rep = classify_separability(
            sys_, tuple(point_cfg["window"]), n_samples=n, tol_sep=tol_sep
        )
        return (
            idx,
            [ax["values"][i] for ax, i in zip(axes, idx)],
            rep.theta_samples[0][1],
            rep.max_abs_theta_dot,
            rep.separable,
            rep.stability,
        )

    env = os.environ.get("DNM_THREADS", "")
    workers = max(1, int(env)) if env else min(8, os.cpu_count() or 1)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(run_point, grid))
    results.sort(key=lambda r: r[0])  # deterministic by grid index

    path = out_base + "_sweep.csv"
    axis_names = ",".join(ax["path"].replace(",", "_") for ax in axes)
    with open(path, "w", newline="") as fh:
        fh.write(f"{axis_names},theta_t0,max_abs_theta_dot,separable,stability\n")
        for _, values, theta0, rate, sep, stab in results:
            cols = [_fmt(v) for v in values] + [
                _fmt(theta0),
                _fmt(rate),
                "true" if sep else "false",
                stab,
            ]
            fh.write(",".join(cols) + "\n")
    print(path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dnm", description="Dynamical normal-mode analysis and simulation"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("analyze", "classify", "simulate", "sweep"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--out", default=None)
        p.add_argument("--samples", type=int, default=None)
        if name == "simulate":
            p.add_argument("--dt", type=float, default=None)
            p.add_argument("--larmor", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        out_base = _out_base(cfg, args.out)
        if args.command == "analyze":
            return cmd_analyze(cfg, out_base, args.samples)
        if args.command == "classify":
            return cmd_classify(cfg, args.samples)
        if args.command == "simulate":
            return cmd_simulate(cfg, out_base, args.dt, args.larmor)
        return cmd_sweep(cfg, out_base, args.samples)
    except ConfigError as exc:
        print(f"config error: {exc}", file=_sys.stderr)
        return EXIT_CONFIG
    except (PresetDomainError, ScheduleDomainError) as exc:
        print(f"preset domain error: {exc}", file=_sys.stderr)
        return EXIT_PRESET
    except DivergenceError as exc:
        print(f"divergence: {exc}", file=_sys.stderr)
        return EXIT_DIVERGENCE
    except DnmError as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
