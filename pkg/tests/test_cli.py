import json
import os

import numpy as np
import pytest

from swtest.cli import main, read_power_csv, read_timing_csv
from swtest.geometry import PointCloud
from swtest.scenarios import save_point_cloud_csv


@pytest.fixture
def csv_pair(tmp_path):
    rng = np.random.default_rng(0)
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    save_point_cloud_csv(PointCloud(rng.normal(size=(30, 3))), a)
    save_point_cloud_csv(PointCloud(rng.normal(size=(30, 3)) + 3.0), b)
    return str(a), str(b)


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def machine_lines(out):
    fields = {}
    for line in out.splitlines():
        if "=" in line and " " not in line.split("=")[0]:
            key, _, value = line.partition("=")
            fields[key] = value
    return fields


def test_cmd_test_same_file_accepts(capsys, csv_pair):
    a, _ = csv_pair
    code, out, _ = run_cli(capsys, "test", a, a, "--B", "30", "--L", "8", "--seed", "1")
    assert code == 0
    fields = machine_lines(out)
    assert float(fields["statistic"]) == 0.0
    assert fields["reject"] == "false"
    assert "accept" in out


def test_cmd_test_exit_zero_on_reject(capsys, csv_pair):
    a, b = csv_pair
    code, out, _ = run_cli(capsys, "test", a, b, "--B", "60", "--L", "10", "--seed", "1")
    assert code == 0
    fields = machine_lines(out)
    assert fields["reject"] == "true"
    assert float(fields["p_value"]) == pytest.approx(1.0 / 61.0)


def test_cmd_test_mmd_linear_rejects_mean_shift(capsys, csv_pair):
    a, b = csv_pair
    code, out, _ = run_cli(capsys, "test", a, b, "--method", "mmd-linear", "--B", "60", "--seed", "2")
    assert code == 0
    assert machine_lines(out)["reject"] == "true"


def test_cmd_test_missing_file(capsys, csv_pair, tmp_path):
    a, _ = csv_pair
    missing = str(tmp_path / "nope.csv")
    code, _, err = run_cli(capsys, "test", a, missing)
    assert code == 2
    assert "nope.csv" in err


def test_cmd_test_dimension_mismatch(capsys, tmp_path, csv_pair):
    a, _ = csv_pair
    rng = np.random.default_rng(1)
    other = tmp_path / "wide.csv"
    save_point_cloud_csv(PointCloud(rng.normal(size=(10, 5))), other)
    code, _, err = run_cli(capsys, "test", a, str(other))
    assert code == 2
    assert "dimension mismatch" in err


def test_unknown_method_lists_choices(capsys, csv_pair):
    a, b = csv_pair
    code, _, err = run_cli(capsys, "test", a, b, "--method", "mmd-cubic")
    assert code == 1
    assert "mmd-gaussian" in err


def test_unknown_scenario_lists_choices(capsys):
    code, _, err = run_cli(capsys, "power", "--scenario", "banana")
    assert code == 1
    assert "covariance_shift" in err


def test_bad_projection_flag(capsys, csv_pair):
    a, b = csv_pair
    code, _, err = run_cli(capsys, "test", a, b, "--L", "0.7n")
    assert code == 1
    assert "--L" in err


def test_cmd_power_writes_csv_and_manifest(capsys, tmp_path):
    out_dir = str(tmp_path / "out")
    args = [
        "power",
        "--scenario", "covariance_shift",
        "--methods", "sw,mmd-linear",
        "--sweep", "n",
        "--grid", "16,24",
        "--d", "6",
        "--reps", "4",
        "--B", "20",
        "--L", "8",
        "--seed", "3",
        "--out-dir", out_dir,
        "--svg",
    ]
    code, out, _ = run_cli(capsys, *args)
    assert code == 0
    csv_path = os.path.join(out_dir, "power.csv")
    curve = read_power_csv(csv_path)
    assert curve.grid == [16, 24]
    assert curve.methods == ["sw", "mmd-linear"]
    assert curve.reps == 4
    with open(os.path.join(out_dir, "power_manifest.json")) as f:
        manifest = json.load(f)
    assert manifest["command"] == "power"
    assert manifest["master_seed"] == 3
    assert "power.csv" in manifest["outputs"]
    svg = open(os.path.join(out_dir, "power.svg")).read()
    assert svg.count("<polyline") == 2

    # determinism: identical bytes on re-run with the same seed
    first_bytes = open(csv_path, "rb").read()
    code, _, _ = run_cli(capsys, *args)
    assert code == 0
    assert open(csv_path, "rb").read() == first_bytes


def test_power_csv_round_trip(capsys, tmp_path):
    out_dir = str(tmp_path / "rt")
    code, _, _ = run_cli(
        capsys,
        "power", "--scenario", "covariance_shift", "--grid", "12,20", "--d", "4",
        "--reps", "3", "--B", "20", "--L", "6", "--seed", "4", "--out-dir", out_dir,
    )
    assert code == 0
    curve = read_power_csv(os.path.join(out_dir, "power.csv"))
    rows = curve.rows()
    assert [r["sweep_value"] for r in rows] == [12, 20]
    assert all(r["reps"] == 3 for r in rows)


def test_cmd_power_four_series_and_L_sweep(capsys, tmp_path):
    out_dir = str(tmp_path / "four")
    code, _, _ = run_cli(
        capsys,
        "power", "--scenario", "ball_sphere", "--d", "4",
        "--methods", "sw,mmd-gaussian,mmd-laplace,mmd-linear",
        "--sweep", "L", "--grid", "0.5n,n", "--n", "14",
        "--reps", "2", "--B", "20", "--seed", "9", "--out-dir", out_dir,
    )
    assert code == 0
    curve = read_power_csv(os.path.join(out_dir, "power.csv"))
    assert curve.methods == ["sw", "mmd-gaussian", "mmd-laplace", "mmd-linear"]
    assert len(curve.rows()) == 8


def test_cmd_type1_reduced(capsys, tmp_path):
    out_dir = str(tmp_path / "t1")
    code, out, _ = run_cli(
        capsys,
        "type1", "--n", "16", "--d", "5", "--reps", "10", "--B", "20", "--seed", "5",
        "--out-dir", out_dir,
    )
    assert code == 0
    curve = read_power_csv(os.path.join(out_dir, "type1.csv"))
    assert curve.grid == [8, 16, 32]


def test_cmd_nullhist(capsys, tmp_path):
    out_dir = str(tmp_path / "nh")
    code, _, _ = run_cli(
        capsys,
        "nullhist", "--dist", "gaussian", "--n", "12", "--L", "6", "--reps", "20",
        "--bins", "8", "--seed", "6", "--out-dir", out_dir,
    )
    assert code == 0
    lines = open(os.path.join(out_dir, "nullhist.csv")).read().strip().splitlines()
    assert lines[0] == "bin_left,bin_right,count"
    assert len(lines) == 9
    counts = [int(line.split(",")[2]) for line in lines[1:]]
    assert sum(counts) == 20


def test_cmd_bench(capsys, tmp_path):
    out_dir = str(tmp_path / "bench")
    code, _, _ = run_cli(
        capsys,
        "bench", "--base-n", "20", "--base-L", "8", "--base-B", "20", "--d", "3",
        "--runs", "5", "--n-grid", "20,40", "--L-grid", "8", "--B-grid", "20",
        "--seed", "7", "--out-dir", out_dir,
    )
    assert code == 0
    records = read_timing_csv(os.path.join(out_dir, "timing.csv"))
    assert len(records) == 4
    assert all(r.seconds > 0 for r in records)


def test_out_dir_env_default(capsys, tmp_path, monkeypatch, csv_pair):
    env_dir = str(tmp_path / "envout")
    monkeypatch.setenv("SWTEST_OUT_DIR", env_dir)
    code, _, _ = run_cli(
        capsys,
        "power", "--scenario", "covariance_shift", "--grid", "12", "--d", "4",
        "--reps", "2", "--B", "20", "--L", "6", "--seed", "8",
    )
    assert code == 0
    assert os.path.exists(os.path.join(env_dir, "power.csv"))
