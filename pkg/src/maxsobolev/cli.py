"""Command-line entry point.

Every subcommand builds one experiment from flags (optionally seeded by a
plain ``key=value`` config file, flags winning), writes ``<stem>.csv`` and
``<stem>.json`` into ``--out`` and prints the headline scalars.

Exit status: 0 on success, 1 when the experiment reports an invariant
violation, 2 on a configuration error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import grid as G
from . import verify
from .capacity import CapacityProblem, estimate_p_capacity
from .grid import CATALOG, AnalyticFunction
from .measures import MEASURES, check_spherical_like, make_measure
from .operators import (ScaleLadder, average_field, maximal,
                        riesz_potential)
from .report import Report

FUNCTION_ALIASES = {
    "gaussian": "gaussian-bump",
    "ramp": "cutoff-ramp",
    "e1": "radial-power-log",
    "smoothed-ball": "ball-indicator-smoothed",
}

# option name -> (type, default)
OPTIONS = {
    "n": (int, 2),
    "L": (float, 3.0),
    "m": (int, 129),
    "measure": (str, "sphere"),
    "nodes": (int, None),
    "fn": (str, "gaussian-bump"),
    "fn_param": (str, None),
    "t_min": (float, None),
    "t_max": (float, None),
    "q": (float, 2 ** 0.125),
    "p": (float, 2.0),
    "t": (float, 0.5),
    "x": (str, None),
    "out": (str, "reports"),
    "stem": (str, None),
    "seed": (int, 0),
    "levels": (int, 4),
    "samples": (int, 0),
    "radii": (str, None),
    "eps": (str, None),
    "log_exponent": (float, None),
    "shifts": (str, "1,2,4"),
    "k_range": (str, None),
    "level_count": (int, 21),
    "target": (str, "ball"),
    "size": (float, 1.0),
    "max_iter": (int, 3000),
    "tol": (float, 1e-7),
    "method": (str, "auto"),
    "sweep": (str, None),
}


# experiments whose natural resolution differs from the global defaults
EXPERIMENT_DEFAULTS = {
    ("example1", "profile"): {"L": 1.0, "m": 2001},
    ("capacity", "solve"): {"n": 3, "L": 8.0, "m": 65},
}


class ConfigError(ValueError):
    pass


EXPERIMENTS = {
    ("measure", "check"): "spherical-like constant under (x, r) refinement; "
                          "options: measure, n, nodes, levels, samples, seed",
    ("op", "maximal"): "maximal function of fn against measure on the grid; "
                       "options: fn, measure, n, L, m, t_min, t_max, q, method, x",
    ("op", "riesz"): "Riesz potential of |fn| (order one); options: fn, n, L, m, "
                     "method, x",
    ("op", "average"): "average of |fn| against measure at scale t; "
                       "options: fn, measure, t, n, L, m, method, x",
    ("verify", "domination"): "max node ratio of the measure maximal function to "
                              "M u + I|grad u|; options: fn, measure, n, L, m, ladder",
    ("verify", "meyers-ziemer"): "trace ratio sum w|u(z)| / ||grad u||_1 and its ratio "
                                 "to M; options: fn, measure, n, L, m, sweep",
    ("verify", "truncation"): "dyadic band gradient masses versus the total; "
                              "options: fn, n, L, m, k_range",
    ("verify", "level-profile"): "phi(t) = gradient mass of {0 <= v <= t}; "
                                 "options: fn, n, L, m, level_count",
    ("verify", "prop1"): "shift stability of the Hardy-Littlewood maximal function; "
                         "options: fn, n, L, m, p, shifts (multiples of h), ladder",
    ("example1", "profile"): "maximal function and sphere means of radial-power-log "
                             "near the origin; options: n, L, m, radii, nodes",
    ("example1", "divergence"): "D(eps) by radial quadrature; options: n, eps, "
                                "log_exponent",
    ("lebesgue", "converge"): "oscillation d(t) at x as t shrinks; options: fn, "
                              "measure, x, n, L, m, ladder",
    ("capacity", "solve"): "boxed p-capacity of a ball or cube; options: n, p, target, "
                           "size, L, m, levels, max_iter, tol",
}


# --- configuration ------------------------------------------------------

def read_config_file(path) -> dict:
    """Parse ``key=value`` lines; ``#`` starts a comment."""
    out = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in OPTIONS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = val
    return out


def resolve(args: argparse.Namespace) -> dict:
    """Merge defaults, config file and flags (in increasing priority)."""
    cfg = {key: default for key, (_, default) in OPTIONS.items()}
    cfg.update(EXPERIMENT_DEFAULTS.get((args.group, getattr(args, "name", None)), {}))
    if args.config:
        for key, val in read_config_file(args.config).items():
            kind = OPTIONS[key][0]
            try:
                cfg[key] = kind(val)
            except ValueError as exc:
                raise ConfigError(f"config key {key}: cannot parse {val!r}") from exc
    for key in OPTIONS:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    return cfg


def _floats(text, name) -> list[float]:
    try:
        return [float(s) for s in str(text).replace(",", " ").split()]
    except ValueError as exc:
        raise ConfigError(f"{name}: expected a comma-separated list of numbers") from exc


def _function(cfg) -> AnalyticFunction:
    tag = FUNCTION_ALIASES.get(cfg["fn"], cfg["fn"])
    if tag not in CATALOG:
        raise ConfigError(f"unknown function {cfg['fn']!r}; known: {sorted(CATALOG)}")
    params = {}
    if cfg["fn_param"]:
        for item in str(cfg["fn_param"]).split(","):
            if "=" not in item:
                raise ConfigError(f"fn-param: expected key=value, got {item!r}")
            k, v = item.split("=", 1)
            vals = v.split(":")
            params[k.strip()] = float(vals[0]) if len(vals) == 1 else tuple(map(float, vals))
    return AnalyticFunction(tag, params)


def _measure(cfg):
    if cfg["measure"] not in MEASURES:
        raise ConfigError(f"unknown measure {cfg['measure']!r}; known: {sorted(MEASURES)}")
    return make_measure(cfg["measure"], cfg["n"], cfg["nodes"])


def _grid_function(cfg, used=None, zero_boundary=True):
    f = _function(cfg)
    if used is not None:
        used.update({"fn": f.tag, "fn_param": cfg["fn_param"]})
    u = G.sample(f, cfg["n"], cfg["L"], cfg["m"])
    return G.enforce_zero_boundary(u) if zero_boundary else u


def _ladder(cfg, u, R=1.0) -> ScaleLadder:
    base = ScaleLadder.for_grid(u, R, cfg["q"])
    return ScaleLadder(cfg["t_min"] or base.t_min, cfg["t_max"] or base.t_max, cfg["q"])


def _field_report(name, field, cfg, extra=None) -> Report:
    """Per-node rows, or the single probe node when ``x`` is given."""
    pts = field.coords().reshape(-1, field.n)
    vals = field.values.ravel()
    scalars = {"max": float(vals.max()), "min": float(vals.min()),
               "l1": G.lp_norm(field, 1)}
    if cfg["x"]:
        x = _floats(cfg["x"], "x")
        if len(x) != field.n:
            raise ConfigError(f"x has {len(x)} coordinates, expected {field.n}")
        idx = np.ravel_multi_index(field.node_index(x), (field.m,) * field.n)
        pts, vals = pts[idx:idx + 1], vals[idx:idx + 1]
        scalars["value_at_x"] = float(vals[0])
    rows = [{**{f"x{k}": float(p[k]) for k in range(field.n)}, "value": float(v)}
            for p, v in zip(pts, vals)]
    params = {"n": field.n, "L": field.L, "m": field.m, "fn": cfg["fn"],
              "fn_param": cfg["fn_param"], "x": cfg["x"], **(extra or {})}
    return Report(name, params, scalars=scalars, rows=rows)


# --- experiments ----------------------------------------------------------

def run_experiment(group: str, name: str, cfg: dict) -> tuple[Report, bool]:
    """Returns the report and whether its invariants hold."""
    used = {}
    rep, ok = _dispatch(group, name, cfg, used)
    if used:
        # echo the test function so the JSON alone reproduces the run
        rep.params = {**rep.params, **used}
    return rep, ok


def _dispatch(group: str, name: str, cfg: dict, used: dict) -> tuple[Report, bool]:
    key = (group, name)
    if key not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {group} {name}")
    if key == ("measure", "check"):
        rep = check_spherical_like(_measure(cfg), levels=cfg["levels"],
                                   extra_samples=cfg["samples"], seed=cfg["seed"])
        return rep, True
    if key == ("op", "maximal"):
        u, mu = _grid_function(cfg, used), _measure(cfg)
        lad = _ladder(cfg, u, mu.R)
        f = maximal(u, mu, lad, cfg["method"])
        return _field_report("op_maximal", f, cfg, {"measure": mu.label,
                             "t_min": lad.t_min, "t_max": lad.t_max, "q": lad.ratio}), True
    if key == ("op", "riesz"):
        u = _grid_function(cfg, used)
        method = "fft" if cfg["method"] == "auto" else cfg["method"]
        f = riesz_potential(abs(u), method)
        return _field_report("op_riesz", f, cfg, {"method": method}), True
    if key == ("op", "average"):
        u, mu = _grid_function(cfg, used), _measure(cfg)
        f = average_field(u, mu, cfg["t"], cfg["method"])
        return _field_report("op_average", f, cfg, {"measure": mu.label,
                                                    "t": cfg["t"]}), True
    if key == ("verify", "domination"):
        u, mu = _grid_function(cfg, used), _measure(cfg)
        rep = verify.domination_ratio(u, mu, _ladder(cfg, u, mu.R))
        return rep, not rep.flags.get("divergent", False)
    if key == ("verify", "meyers-ziemer"):
        if cfg["sweep"]:
            rep = verify.meyers_ziemer_dirac_sweep(cfg["n"], _floats(cfg["sweep"], "sweep"),
                                                   cfg["m"])
            return rep, True
        rep = verify.meyers_ziemer_ratio(_grid_function(cfg, used), _measure(cfg))
        return rep, True
    if key == ("verify", "truncation"):
        u = _grid_function(cfg, used)
        k_range = None
        if cfg["k_range"]:
            lo, hi = (int(v) for v in _floats(cfg["k_range"], "k-range"))
            k_range = range(lo, hi + 1)
        rep = verify.truncation_partition_check(u, k_range)
        exact = rep["abs_error"] <= 1e-12 * max(1.0, rep["total"])
        return rep, exact or bool(rep["missing_bands"])
    if key == ("verify", "level-profile"):
        u = _grid_function(cfg, used)
        top = float(u.values.max())
        rep = verify.gradient_level_profile(u, np.linspace(0.0, top, cfg["level_count"]))
        return rep, rep.flags["monotone"] is not False
    if key == ("verify", "prop1"):
        u = _grid_function(cfg, used)
        shifts = [(k * u.h,) + (0.0,) * (u.n - 1) for k in _floats(cfg["shifts"], "shifts")]
        method = "fft" if cfg["method"] == "auto" else cfg["method"]
        rep = verify.proposition1_check(u, shifts, cfg["p"], _ladder(cfg, u), method)
        return rep, rep["max_slack"] <= 1e-10
    if key == ("example1", "profile"):
        radii = _floats(cfg["radii"], "radii") if cfg["radii"] else None
        rep = verify.example1_profile(cfg["n"], radii, cfg["L"], cfg["m"],
                                      sphere_nodes=cfg["nodes"] or 4096)
        return rep, rep["S_ge_v_everywhere"]
    if key == ("example1", "divergence"):
        eps = _floats(cfg["eps"], "eps") if cfg["eps"] else None
        rep = verify.example1_divergence(cfg["n"], eps, cfg["log_exponent"])
        return rep, rep["strictly_increasing"]
    if key == ("lebesgue", "converge"):
        u, mu = _grid_function(cfg, used), _measure(cfg)
        x = _floats(cfg["x"], "x") if cfg["x"] else [0.0] * cfg["n"]
        if len(x) != cfg["n"]:
            raise ConfigError(f"x has {len(x)} coordinates, expected {cfg['n']}")
        u.node_index(x)
        rep = verify.lebesgue_convergence(u, mu, x, _ladder(cfg, u, mu.R))
        return rep, rep["d_le_rhs"]
    if key == ("capacity", "solve"):
        build = {"ball": CapacityProblem.ball, "cube": CapacityProblem.box}
        if cfg["target"] not in build:
            raise ConfigError(f"unknown capacity target {cfg['target']!r}; "
                              f"known: {sorted(build)}")
        prob = build[cfg["target"]](cfg["n"], cfg["p"], cfg["size"], cfg["L"], cfg["m"],
                                    max_iter=cfg["max_iter"], tol=cfg["tol"])
        _, rep = estimate_p_capacity(prob, levels=cfg["levels"])
        return rep, rep["max_energy_increase"] <= 0.0
    raise ConfigError(f"unknown experiment {group} {name}")  # pragma: no cover


def list_catalog() -> str:
    lines = ["measures:"]
    docs = {
        "ball": "normalized Lebesgue measure on the unit ball (R = 1, M = 1)",
        "cube-boundary": "normalized surface measure on the boundary of [-1, 1]^n "
                         "(R = sqrt(n))",
        "dirac": "unit mass at the origin (not spherical-like)",
        "sphere": "normalized surface measure on the unit sphere (R = 1, M = 1)",
    }
    for label in sorted(MEASURES):
        lines.append(f"  {label}: {docs.get(label, '')}")
    lines.append("functions:")
    for tag in sorted(CATALOG):
        _, defaults, desc = CATALOG[tag]
        lines.append(f"  {tag}: {desc}")
        lines.append("    defaults: " + ", ".join(f"{k}={v}" for k, v in sorted(defaults.items())))
    lines.append("function aliases:")
    for alias in sorted(FUNCTION_ALIASES):
        lines.append(f"  {alias} -> {FUNCTION_ALIASES[alias]}")
    lines.append("experiments:")
    for (group, name) in sorted(EXPERIMENTS):
        lines.append(f"  {group} {name}: {EXPERIMENTS[(group, name)]}")
    return "\n".join(lines) + "\n"


# --- argument parsing -------------------------------------------------------

def _add_options(p: argparse.ArgumentParser):
    p.add_argument("--config", help="plain key=value file; flags override it")
    for key, (kind, default) in OPTIONS.items():
        flag = "--" + key.replace("_", "-")
        shown = "" if default is None else f" (default {default})"
        p.add_argument(flag, dest=key, type=kind, default=None, help=f"{key}{shown}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="maxsobolev",
        description="Grid experiments for maximal operators of Sobolev functions.")
    groups = parser.add_subparsers(dest="group", required=True)
    groups.add_parser("catalog", help="list measures, functions and experiments")
    by_group: dict[str, list[str]] = {}
    for group, name in EXPERIMENTS:
        by_group.setdefault(group, []).append(name)
    for group in sorted(by_group):
        gp = groups.add_parser(group)
        subs = gp.add_subparsers(dest="name", required=True)
        for name in sorted(by_group[group]):
            sp = subs.add_parser(name, help=EXPERIMENTS[(group, name)])
            _add_options(sp)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.group == "catalog":
        sys.stdout.write(list_catalog())
        return 0
    try:
        cfg = resolve(args)
        report, ok = run_experiment(args.group, args.name, cfg)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    stem = cfg["stem"] or f"{args.group}_{args.name}".replace("-", "_")
    try:
        csv_path, json_path = report.write(cfg["out"], stem)
    except OSError as exc:
        print(f"error: cannot write reports to {cfg['out']}: {exc}", file=sys.stderr)
        return 2
    summary = report.to_dict()["scalars"]
    print(json.dumps(summary, sort_keys=True))
    print(f"wrote {csv_path} and {json_path}")
    if not ok:
        print("invariant violated", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
