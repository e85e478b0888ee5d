"""Experiment runner: ``slowentropy <command> config.json [--seed S] [--out-dir D] [--threads T]``.

Config schema (JSON object, validated before anything runs):

``system``       system spec, e.g. ``{"kind": "bernoulli", "p": [0.5, 0.5]}``;
                 kinds bernoulli, rotation, odometer, cyclic, trivial, product, skew
``factor``       optional factor spec (relcov, profile, ks); kinds trivial, identity,
                 skew_projection, product_projection, quotient, optional ``empirical``
``partition``    partition spec on the system, e.g. ``{"kind": "cylinder", "length": 1}``
``folner``       ``{"kind": "interval"}``, ``{"kind": "union", "anchors": [...], "width": V}``
                 or ``{"kind": "rigidity", "rigidity_times": [...], "width_rule": "log"}``
``rate``         ``{"kind": "log" | "poly" | "exp" | "table", "t": ..., "table": [...]}``
``epsilon_grid`` list of epsilons in (0, 1)
``n_grid``       list of positive Folner indices
``seed``         integer, required
``mode``         covering mode: auto, exact, bracket, greedy
``sampling``     auto, exact, monte_carlo; ``n_samples``; ``base``, ``base_budget``, ``fiber_budget``
``cocycle``      rigidity/mixing: ``{"value": aut}``, ``{"partition": p, "values": [aut, ...]}``
                 or ``{"partition": p, "random_dyadic": true, "rank": M, "count": C}``
``points``       number of sampled base points (rigidity/mixing)
``horizon``, ``delta``, ``depth``, ``first_only``   rigidity scan parameters
``set``          ``{"depth": d, "cells": [...]}`` dyadic set for mixing; ``times`` list of n
``threads``      worker count (default: logical cores)

Exit codes: 0 success, 2 schema or argument error, 3 insufficient fiber data,
4 unsupported operation.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
import time
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .covering import cover_estimate
from .entropy import DEFAULT_EPSILONS, DEFAULT_NS, RateFunction, boundedness_verdict, ks_from_profile, \
    slow_entropy_profile
from .errors import InsufficientFiberData, InvalidArgument, SlowEntropyError, UnsupportedOperation
from .folner import FolnerSequence
from .names import collect_name_sample
from .relative import collect_fibers, relative_from_batch
from .rigidity import DyadicSet, cocycle_from_config, dyadic_rigidity_scan, mixing_statistic, \
    rigidity_report_csv, rigidity_scan
from .systems import build, build_factor, build_partition

COMMANDS = ("cov", "relcov", "profile", "ks", "rigidity", "mixing", "validate")

_OBJ = {"type": "object", "required": ["kind"], "properties": {"kind": {"type": "string"}}}
_EPS = {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1}

SCHEMA = {
    "type": "object",
    "required": ["seed"],
    "properties": {
        "system": _OBJ,
        "factor": {"type": ["object", "null"]},
        "partition": _OBJ,
        "folner": _OBJ,
        "rate": {"type": ["object", "string"]},
        "epsilon_grid": {"type": "array", "minItems": 1, "items": _EPS},
        "n_grid": {"type": "array", "minItems": 1, "items": {"type": "integer", "minimum": 1}},
        "seed": {"type": "integer", "minimum": 0},
        "mode": {"enum": ["auto", "exact", "bracket", "greedy"]},
        "sampling": {"enum": ["auto", "exact", "monte_carlo"]},
        "n_samples": {"type": "integer", "minimum": 1},
        "base": {"enum": ["exact", "monte_carlo"]},
        "base_budget": {"type": "integer", "minimum": 1},
        "fiber_budget": {"type": "integer", "minimum": 1},
        "threads": {"type": "integer", "minimum": 1},
        "cocycle": {"type": "object"},
        "points": {"type": "integer", "minimum": 1},
        "horizon": {"type": "integer", "minimum": 1},
        "delta": _EPS,
        "depth": {"type": "integer", "minimum": 1},
        "first_only": {"type": "boolean"},
        "set": {"type": "object", "required": ["depth", "cells"],
                "properties": {"depth": {"type": "integer", "minimum": 0},
                               "cells": {"type": "array", "minItems": 1,
                                         "items": {"type": "integer", "minimum": 0}}}},
        "times": {"type": "array", "items": {"type": "integer", "minimum": 0}},
        "window": {"type": "integer", "minimum": 1},
    },
}

REQUIRED = {
    "cov": ["system", "partition", "epsilon_grid"],
    "relcov": ["system", "factor", "partition", "epsilon_grid"],
    "profile": ["system", "partition"],
    "ks": ["system", "partition"],
    "rigidity": ["system", "cocycle"],
    "mixing": ["system", "cocycle", "set", "times"],
    "validate": [],
}


class ConfigError(SlowEntropyError):
    pass


def _field_path(error: jsonschema.ValidationError) -> str:
    out = ""
    for part in error.absolute_path:
        out += f"[{part}]" if isinstance(part, int) else (f".{part}" if out else str(part))
    return out or "<root>"


def validate_config(config: dict, command: str = "validate") -> None:
    validator = jsonschema.Draft7Validator(SCHEMA)
    error = jsonschema.exceptions.best_match(validator.iter_errors(config))
    if error is not None:
        raise ConfigError(f"{_field_path(error)}: {error.message}")
    for key in REQUIRED[command]:
        if key not in config:
            raise ConfigError(f"{key}: required for '{command}'")


def _csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format(v, ".9g") if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _warnings(desc) -> list:
    if isinstance(desc, dict):
        out = list(desc.get("warnings", []))
        for v in desc.values():
            out += _warnings(v)
        return out
    if isinstance(desc, list):
        return [w for v in desc for w in _warnings(v)]
    return []


def _setup(cfg):
    system = build(cfg["system"])
    partition = build_partition(system, cfg["partition"])
    folner = FolnerSequence.from_config(cfg.get("folner", {"kind": "interval"}))
    return system, partition, folner


def _grids(cfg):
    return list(cfg.get("epsilon_grid", DEFAULT_EPSILONS)), list(cfg.get("n_grid", DEFAULT_NS))


def run_cov(cfg, seed, threads):
    system, partition, folner = _setup(cfg)
    eps_grid, n_grid = _grids(cfg)
    rows = []
    for n in n_grid:
        F = folner(n)
        sample = None
        if cfg.get("sampling", "auto") in ("auto", "exact"):
            try:
                sample = collect_name_sample(system, partition, F, "exact")
            except UnsupportedOperation:
                if cfg.get("sampling") == "exact":
                    raise
        if sample is None:
            sample = collect_name_sample(system, partition, F, "monte_carlo", cfg.get("n_samples", 4096), seed)
        for eps in eps_grid:
            est = cover_estimate(sample, eps, cfg.get("mode", "auto"))
            rows.append([n, len(F), float(eps), est.lower, est.upper,
                         "" if est.exact is None else est.exact, est.method, est.n_words])
    header = ["n", "F_size", "epsilon", "cov_lower", "cov_upper", "cov_exact", "method", "n_words"]
    return {"cov.csv": _csv(header, rows)}, {"epsilon_grid": eps_grid, "n_grid": n_grid}


def run_relcov(cfg, seed, threads):
    system, partition, folner = _setup(cfg)
    factor = build_factor(system, cfg["factor"])
    eps_grid, n_grid = _grids(cfg)
    rows, fibers = [], []
    for n in n_grid:
        F = folner(n)
        batch = collect_fibers(factor, partition, F, cfg.get("base", "monte_carlo"), cfg.get("base_budget", 256),
                               cfg.get("fiber_budget", 512), seed)
        for eps in eps_grid:
            est = relative_from_batch(batch, eps, cfg.get("mode", "bracket"))
            rows.append([n, len(F), float(eps), est.value_lower, est.value_upper, len(batch)])
            for i, e in enumerate(est.per_fiber):
                fibers.append([n, float(eps), i, float(batch.base_weights[i]), e.lower, e.upper])
    out = {"relcov.csv": _csv(["n", "F_size", "epsilon", "value_lower", "value_upper", "n_fibers"], rows),
           "fibers.csv": _csv(["n", "epsilon", "y_index", "weight", "lower", "upper"], fibers)}
    return out, {"epsilon_grid": eps_grid, "n_grid": n_grid, "factor": factor.describe()}


def _profile(cfg, seed, threads):
    system, partition, folner = _setup(cfg)
    target = build_factor(system, cfg["factor"]) if cfg.get("factor") else system
    eps_grid, n_grid = _grids(cfg)
    U = RateFunction.from_config(cfg.get("rate", "log"))
    return slow_entropy_profile(target, partition, folner, eps_grid, n_grid, U, cfg.get("mode", "auto"),
                                cfg.get("sampling", "auto"), cfg.get("n_samples", 4096), seed,
                                cfg.get("base", "monte_carlo"), cfg.get("base_budget", 256),
                                cfg.get("fiber_budget", 512), threads)


def _jsonable(meta):
    return json.loads(json.dumps(meta, default=str))


def run_profile(cfg, seed, threads):
    profile = _profile(cfg, seed, threads)
    meta = dict(profile.metadata, verdict=boundedness_verdict(profile, cfg.get("window", 3)))
    return {"profile.csv": profile.to_csv()}, _jsonable(meta)


def run_ks(cfg, seed, threads):
    profile = _profile(cfg, seed, threads)
    ks = ks_from_profile(profile)
    rows = [[float(e), ks.slopes_lower[e], ks.slopes_upper[e]] for e in profile.epsilons]
    meta = dict(profile.metadata, ks_interval=list(ks.interval))
    return {"profile.csv": profile.to_csv(), "ks.csv": _csv(["epsilon", "slope_lower", "slope_upper"], rows)}, \
        _jsonable(meta)


def _cocycles(cfg, seed):
    base = build(cfg["system"])
    spec = cfg["cocycle"]
    rng = np.random.default_rng(seed)
    count = spec.get("count", 1) if spec.get("random_dyadic") else 1
    cocycles = [cocycle_from_config(base, spec, rng) for _ in range(count)]
    points = base.sample_state(cfg.get("points", 1), seed)
    return base, cocycles, points


def run_rigidity(cfg, seed, threads):
    base, cocycles, points = _cocycles(cfg, seed)
    N, delta, k = cfg.get("horizon", 64), cfg.get("delta", 0.05), cfg.get("depth", 3)
    first_only = cfg.get("first_only", False)
    if all(a.is_dyadic for a in cocycles):
        times, dists = dyadic_rigidity_scan(cocycles, points, N, delta, k, first_only, return_distances=True)
    else:
        times, dists = [], []
        for a in cocycles:
            res = [rigidity_scan(a, y, N, delta, k, return_distances=True) for y in base.from_state(points)]
            times.append([r[0] for r in res])
            dists.append([r[1] for r in res])
    scans = [t for per in times for t in per]
    flat = [d for per in dists for d in per]
    hit = sum(bool(t) for t in scans)
    meta = {"horizon": N, "delta": delta, "depth": k, "cocycles": len(cocycles), "points": len(points),
            "fraction_with_return": hit / len(scans)}
    return {"rigidity.csv": rigidity_report_csv(scans, flat)}, meta


def run_mixing(cfg, seed, threads):
    base, cocycles, points = _cocycles(cfg, seed)
    E = DyadicSet(cfg["set"]["depth"], frozenset(cfg["set"]["cells"]))
    rows = []
    pts = base.from_state(points)
    for c, a in enumerate(cocycles):
        for i, y in enumerate(pts):
            for n in cfg["times"]:
                rows.append([c * len(pts) + i, n, mixing_statistic(a, y, E, n)])
    return {"mixing.csv": _csv(["point_index", "n", "statistic"], rows)}, {"set_measure": E.measure}


RUNNERS = {"cov": run_cov, "relcov": run_relcov, "profile": run_profile, "ks": run_ks,
           "rigidity": run_rigidity, "mixing": run_mixing}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="slowentropy", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("config", type=Path, help="experiment config (JSON)")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--out-dir", type=Path, default=None, help="output directory")
        p.add_argument("--threads", type=int, default=None, help="worker count")
    return parser


def run(command: str, config_path: Path, seed=None, out_dir=None, threads=None) -> int:
    raw = Path(config_path).read_bytes()
    try:
        cfg = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"<root>: invalid JSON ({exc.msg} at line {exc.lineno})") from exc
    if seed is not None:
        cfg["seed"] = seed
    validate_config(cfg, command)
    if command == "validate":
        print("config ok")
        return 0
    threads = threads or cfg.get("threads") or os.cpu_count() or 1
    out_dir = Path(out_dir or cfg.get("output", "."))
    start = time.perf_counter()
    files, meta = RUNNERS[command](cfg, cfg["seed"], threads)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, body in files.items():
        with open(out_dir / name, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(body)
    system_desc = build(cfg["system"]).describe() if "system" in cfg else {}
    metadata = {"command": command, "version": __version__, "seed": cfg["seed"], "threads": threads,
                "config_sha256": hashlib.sha256(raw).hexdigest(), "config": cfg,
                "wall_time_s": round(time.perf_counter() - start, 3), "warnings": _warnings(system_desc),
                "files": sorted(files), **meta}
    with open(out_dir / "metadata.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(metadata, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return run(args.command, args.config, args.seed, args.out_dir, args.threads)
    except (ConfigError, InvalidArgument, KeyError, TypeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InsufficientFiberData as exc:
        print(f"insufficient fiber data: {exc}", file=sys.stderr)
        return 3
    except UnsupportedOperation as exc:
        print(f"unsupported operation: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
