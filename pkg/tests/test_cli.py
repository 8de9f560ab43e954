import csv
import json
import os

import pytest

from polygas import cli


def run_cli(args):
    return cli.main(args)


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_sample_degree_one_root(tmp_path):
    out = str(tmp_path)
    code = run_cli(["sample", "--out", out, "--model", "kac", "--n", "1", "--seeds", "1"])
    assert code == 0
    run_dirs = [d for d in os.listdir(out) if d.startswith("sample-")]
    assert len(run_dirs) == 1
    run_dir = os.path.join(out, run_dirs[0])
    coeff_rows = read_rows(os.path.join(run_dir, "coefficients_kac_n1_seed0.csv"))
    assert coeff_rows[0] == ["k", "re", "im"]
    a0 = complex(float(coeff_rows[1][1]), float(coeff_rows[1][2]))
    a1 = complex(float(coeff_rows[2][1]), float(coeff_rows[2][2]))
    root_rows = read_rows(os.path.join(run_dir, "roots_kac_n1_seed0.csv"))
    root = complex(float(root_rows[1][0]), float(root_rows[1][1]))
    assert root == pytest.approx(-a0 / a1, rel=1e-12)
    assert os.path.exists(os.path.join(run_dir, "distances.csv"))
    assert os.path.exists(os.path.join(run_dir, "runs.jsonl"))


def test_sample_outputs_byte_identical(tmp_path):
    out = str(tmp_path)
    args = ["sample", "--out", out, "--model", "kac", "--n", "4", "--seeds", "2"]
    assert run_cli(args) == 0
    run_dir = os.path.join(out, [d for d in os.listdir(out) if d.startswith("sample-")][0])
    first = {
        f: open(os.path.join(run_dir, f), "rb").read()
        for f in os.listdir(run_dir)
        if f != "runs.jsonl"
    }
    assert run_cli(args) == 0
    for f, blob in first.items():
        assert open(os.path.join(run_dir, f), "rb").read() == blob
    records = open(os.path.join(run_dir, "runs.jsonl")).read().strip().split("\n")
    assert len(records) == 2  # records accumulate, data does not fork


def test_gibbs_outputs(tmp_path):
    out = str(tmp_path)
    code = run_cli(
        ["gibbs", "--out", out, "--model", "kac", "--field", "real", "--n", "2",
         "--steps", "4000", "--seed", "3", "--record-every", "20"]
    )
    assert code == 0
    run_dir = os.path.join(out, [d for d in os.listdir(out) if d.startswith("gibbs-")][0])
    chain = read_rows(os.path.join(run_dir, "chain_kac_real_n2_seed3.csv"))
    assert chain[0] == ["step", "H", "k", "z0_re", "z0_im", "z1_re", "z1_im"]
    assert len(chain) > 10
    diag = json.load(open(os.path.join(run_dir, "diagnostics_kac_real_n2_seed3.json")))
    assert "acceptance_rates" in diag and "k_histogram" in diag


def test_rate_on_circle_grid(tmp_path, capsys):
    out = str(tmp_path)
    code = run_cli(["rate", "--out", out, "--variant", "kac", "--grid-size", "4096"])
    assert code == 0
    run_dir = os.path.join(out, [d for d in os.listdir(out) if d.startswith("rate-")][0])
    payload = json.load(open(os.path.join(run_dir, "rate_kac.json")))
    assert abs(payload["value"]) <= 1e-3


def test_equilibrium_summary_schema(tmp_path):
    out = str(tmp_path)
    code = run_cli(
        ["equilibrium", "--out", out, "--variant", "elliptic", "--grid-theta", "10",
         "--grid-phi", "14", "--iterations", "300", "--tolerance", "0.05"]
    )
    assert code == 0
    run_dir = os.path.join(out, [d for d in os.listdir(out) if d.startswith("equilibrium-")][0])
    summary = json.load(open(os.path.join(run_dir, "equilibrium_elliptic.json")))
    assert set(summary) == {"value", "gap", "iterations", "converged"}
    rows = read_rows(os.path.join(run_dir, "equilibrium_elliptic.csv"))
    assert rows[0] == ["x1", "x2", "x3", "weight"]


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("model = kac\nn = 1\nseeds = 2\n# comment\n")
    out = str(tmp_path / "o")
    code = run_cli(["sample", "--config", str(cfg), "--out", out, "--seeds", "1"])
    assert code == 0
    run_dir = os.path.join(out, [d for d in os.listdir(out) if d.startswith("sample-")][0])
    files = os.listdir(run_dir)
    assert any("seed0" in f for f in files)
    assert not any("seed1" in f for f in files)  # flag overrode the file value


def test_usage_error_exit_codes(tmp_path):
    assert run_cli(["rate", "--out", str(tmp_path), "--variant", "nonsense"]) == 2
    assert run_cli(["nope"]) == 2


def test_io_error_exit_code(tmp_path):
    target = tmp_path / "blocked"
    target.write_text("a file, not a directory")
    code = run_cli(["sample", "--out", str(target), "--model", "kac", "--n", "1", "--seeds", "1"])
    assert code == 3


def test_validate_subset(tmp_path):
    out = str(tmp_path)
    code = run_cli(["validate", "--out", out, "--criteria", "1-geometry,8-z-control"])
    assert code == 0
    run_dir = os.path.join(out, [d for d in os.listdir(out) if d.startswith("validate-")][0])
    payload = json.load(open(os.path.join(run_dir, "validation.json")))
    assert {rec["check"] for rec in payload} == {"geometry-identities", "z-constant-uniform-control"}
    assert all(rec["pass"] for rec in payload)


def test_output_root_env_var(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUTPUT_ROOT_ENV, str(tmp_path))
    assert run_cli(["sample", "--model", "kac", "--n", "1", "--seeds", "1"]) == 0
    assert any(d.startswith("sample-") for d in os.listdir(tmp_path))
