import csv
import hashlib
import json
import subprocess
import sys

import pytest

from slowentropy.cli import main

BERNOULLI = {"system": {"kind": "bernoulli", "p": [0.5, 0.5]}, "partition": {"kind": "cylinder", "length": 1},
             "folner": {"kind": "interval"}, "rate": {"kind": "exp", "t": 0.5},
             "epsilon_grid": [0.2, 0.1], "n_grid": [4, 6, 8], "seed": 7}


def write(tmp_path, cfg, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return path


def run(tmp_path, command, cfg, out="out", extra=()):
    path = write(tmp_path, cfg)
    return main([command, str(path), "--out-dir", str(tmp_path / out), *extra])


def test_ks_profile_row_count_and_metadata(tmp_path):
    assert run(tmp_path, "ks", BERNOULLI) == 0
    rows = list(csv.DictReader(open(tmp_path / "out" / "profile.csv", newline="")))
    assert len(rows) >= 3 * 2
    for r in rows:
        int(r["n"]), int(r["F_size"]), float(r["epsilon"]), int(r["cov_lower"]), int(r["cov_upper"])
        float(r["rate"]), float(r["ratio_lower"]), float(r["ratio_upper"])
    meta = json.load(open(tmp_path / "out" / "metadata.json"))
    raw = (tmp_path / "config.json").read_bytes()
    assert meta["config_sha256"] == hashlib.sha256(raw).hexdigest()
    assert meta["epsilon_grid"] == [0.2, 0.1] and meta["seed"] == 7 and "wall_time_s" in meta
    assert len(meta["ks_interval"]) == 2
    assert b"\r" not in (tmp_path / "out" / "profile.csv").read_bytes()


def test_deterministic_output(tmp_path):
    cfg = dict(BERNOULLI, sampling="monte_carlo", n_samples=500)
    assert run(tmp_path, "profile", cfg, "a") == 0
    assert run(tmp_path, "profile", cfg, "b") == 0
    assert (tmp_path / "a" / "profile.csv").read_bytes() == (tmp_path / "b" / "profile.csv").read_bytes()


def test_schema_error_names_field(tmp_path, capsys):
    assert run(tmp_path, "profile", dict(BERNOULLI, epsilon_grid=[1.5])) == 2
    assert "epsilon_grid[0]" in capsys.readouterr().err


@pytest.mark.parametrize("cfg,field", [
    ({k: v for k, v in BERNOULLI.items() if k != "seed"}, "seed"),
    (dict(BERNOULLI, n_grid=[0]), "n_grid[0]"),
    (dict(BERNOULLI, mode="fast"), "mode"),
])
def test_schema_errors(tmp_path, capsys, cfg, field):
    assert run(tmp_path, "profile", cfg) == 2
    assert field in capsys.readouterr().err


def test_validate_and_missing_section(tmp_path, capsys):
    assert run(tmp_path, "validate", BERNOULLI) == 0
    assert run(tmp_path, "relcov", BERNOULLI) == 2
    assert "factor" in capsys.readouterr().err


def test_insufficient_fiber_data_exit_3(tmp_path):
    cfg = {"system": {"kind": "product", "first": {"kind": "bernoulli", "p": [0.5, 0.5]},
                      "second": {"kind": "bernoulli", "p": [0.5, 0.5]}},
           "factor": {"kind": "product_projection", "keep": 0, "empirical": True,
                      "target_partition": {"kind": "cylinder"}, "window": 14, "floor": 50},
           "partition": {"kind": "second", "inner": {"kind": "cylinder"}},
           "epsilon_grid": [0.2], "n_grid": [3], "base_budget": 2, "fiber_budget": 100, "seed": 0}
    assert run(tmp_path, "relcov", cfg) == 3


def test_unsupported_exit_4(tmp_path):
    cfg = {"system": {"kind": "skew", "base": {"kind": "rotation"}, "group": {"kind": "circle"},
                      "cocycle": {"value": 0.3}},
           "partition": {"kind": "fiber", "inner": {"kind": "intervals", "cells": 2}},
           "epsilon_grid": [0.2], "n_grid": [3], "sampling": "exact", "seed": 0}
    assert run(tmp_path, "cov", cfg) == 4


def test_relcov_writes_fiber_csv(tmp_path):
    cfg = {"system": {"kind": "skew", "base": {"kind": "rotation"}, "group": {"kind": "cyclic", "order": 5},
                      "cocycle": {"value": 1}},
           "factor": {"kind": "skew_projection"}, "partition": {"kind": "fiber"},
           "epsilon_grid": [0.2], "n_grid": [4, 8], "base_budget": 6, "seed": 1}
    assert run(tmp_path, "relcov", cfg) == 0
    rows = list(csv.DictReader(open(tmp_path / "out" / "relcov.csv", newline="")))
    assert all(int(r["value_upper"]) <= 5 for r in rows)
    assert len(list(csv.DictReader(open(tmp_path / "out" / "fibers.csv", newline="")))) == 12


def test_rigidity_and_mixing_commands(tmp_path):
    rig = {"system": {"kind": "rotation"}, "cocycle": {"value": {"kind": "cycle", "cells": [0, 1, 2], "rank": 2}},
           "points": 2, "horizon": 12, "delta": 1e-9, "depth": 2, "seed": 0}
    assert run(tmp_path, "rigidity", rig, "r") == 0
    rows = list(csv.DictReader(open(tmp_path / "r" / "rigidity.csv", newline="")))
    assert [int(r["time"]) for r in rows if r["point_index"] == "0"] == [3, 6, 9, 12]
    mix = {"system": {"kind": "rotation"}, "cocycle": {"value": {"kind": "baker"}},
           "set": {"depth": 1, "cells": [0]}, "times": [0, 20], "points": 1, "seed": 0}
    assert run(tmp_path, "mixing", mix, "m") == 0
    rows = list(csv.DictReader(open(tmp_path / "m" / "mixing.csv", newline="")))
    assert [float(r["statistic"]) for r in rows] == [0.25, 0.0]


def test_seed_override_and_module_entry(tmp_path):
    path = write(tmp_path, BERNOULLI)
    res = subprocess.run([sys.executable, "-m", "slowentropy", "cov", str(path), "--seed", "3",
                          "--out-dir", str(tmp_path / "o"), "--threads", "1"], capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    assert json.load(open(tmp_path / "o" / "metadata.json"))["seed"] == 3
