"""Smoke tests for the python module and for the CLI's JSON contracts.

The compiled package is found through PYTHONPATH, the CLI through
MNSBS_CLI, and the JSON schemas through MNSBS_SCHEMAS; the ctest entry
sets all three.
"""

import json
import os
import pathlib
import subprocess

import jsonschema
import numpy as np
import pytest

import mnsbs

SCHEMAS = pathlib.Path(os.environ["MNSBS_SCHEMAS"])
CLI = os.environ["MNSBS_CLI"]


def load_schema(name):
    return json.loads((SCHEMAS / name).read_text())


def atoms(seg_ends, values, p=1):
    cols = []
    prev = 0
    for end, v in zip(seg_ends, values):
        cols.append(np.full((end - prev, p), v, dtype=float))
        prev = end
    return np.vstack(cols)


def test_simulate_shapes_and_determinism():
    data, cps = mnsbs.simulate("S1", T=150, p=3, seed=1)
    assert data.shape == (150, 3)
    assert cps == [50, 100]
    again, _ = mnsbs.simulate("S1", T=150, p=3, seed=1)
    assert np.array_equal(data, again)
    other, _ = mnsbs.simulate("S1", T=150, p=3, seed=2)
    assert not np.array_equal(data, other)


def test_detect_and_infer_roundtrip():
    data = atoms([50, 100, 150], [0.0, 12.0, 24.0])
    res = mnsbs.detect(data, bandwidth=1.0, tau=1.0)
    assert res["k_hat"] == 2
    assert res["estimates"] == [50, 100]
    assert res["rho"] >= 1
    assert res["rho_fallback"] is False

    inf = mnsbs.infer(data, estimates=res["estimates"], bandwidth=1.0, alphas=[0.05], n_draws=1000)
    assert inf["k_hat"] == 2
    assert [c["eta_tilde"] for c in inf["change_points"]] == [50, 100]
    for c in inf["change_points"]:
        assert not c["degenerate"]
        lo, hi = c["ci"][0.05]
        assert lo <= c["eta_tilde"] <= hi


def test_hausdorff_and_quantile_table():
    assert mnsbs.hausdorff([35, 70], [30, 70], 100) == pytest.approx(0.05)
    assert mnsbs.hausdorff([50], [50], 100) == 0.0
    table = mnsbs.quantile_table(n_draws=1000, seed=11)
    q = dict(zip(table["alphas"], table["q_star"]))
    assert len(table["alphas"]) == 999
    assert table["q_star"] == sorted(table["q_star"])
    assert q[0.5] == pytest.approx(0.0, abs=0.3)


def test_errors_map_to_python_exceptions():
    assert issubclass(mnsbs.InputError, ValueError)
    assert issubclass(mnsbs.ConfigError, ValueError)
    with pytest.raises(mnsbs.InputError):
        mnsbs.detect(np.zeros(10))  # not 2d
    with pytest.raises(mnsbs.InputError):
        mnsbs.detect(np.zeros((3, 1)))  # too short
    with pytest.raises(mnsbs.ConfigError):
        mnsbs.detect(np.zeros((50, 1)), tau="bogus")
    with pytest.raises(mnsbs.InputError):
        mnsbs.infer(np.zeros((50, 1)), estimates=[10, 10], n_draws=1000)


def run_cli(*args):
    return subprocess.run([CLI, *args], capture_output=True, text=True, check=True)


def test_cli_outputs_validate_against_schemas(tmp_path):
    csv = tmp_path / "series.csv"
    run_cli("simulate", "--scenario", "S1", "--T", "60", "--p", "2", "--seed", "4", "--out", str(csv))
    meta = json.loads((tmp_path / "series.meta.json").read_text())
    jsonschema.validate(meta, load_schema("simulate-meta.schema.json"))

    detect_out = tmp_path / "detect.json"
    run_cli("detect", "--input", str(csv), "--out", str(detect_out))
    detect_doc = json.loads(detect_out.read_text())
    jsonschema.validate(detect_doc, load_schema("detect.schema.json"))

    infer_out = tmp_path / "infer.json"
    table_out = tmp_path / "table.json"
    run_cli("infer", "--input", str(csv), "--n-draws", "1000",
            "--quantile-table", str(table_out), "--out", str(infer_out))
    jsonschema.validate(json.loads(infer_out.read_text()), load_schema("infer.schema.json"))
    jsonschema.validate(json.loads(table_out.read_text()), load_schema("quantile-table.schema.json"))

    eval_out = tmp_path / "eval.json"
    run_cli("evaluate", "--scenario", "S1", "--reps", "1", "--T", "60", "--p", "2",
            "--n-draws", "1000", "--out-json", str(eval_out))
    jsonschema.validate(json.loads(eval_out.read_text()), load_schema("evaluate.schema.json"))
