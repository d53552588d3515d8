import csv
import json
import subprocess
import sys

import numpy as np
import pytest
import scipy.io

from tetspectral.cli import main, parse_degrees


def read_rows(path):
    with path.open(encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["index", "metric", "value"]
    return rows[1:]


def test_parse_degrees():
    assert parse_degrees("8,12, 16") == [8, 12, 16]
    assert parse_degrees("4:10:2") == [4, 6, 8, 10]
    assert parse_degrees("5:7") == [5, 6, 7]


def test_convergence_rows_and_manifest(tmp_path):
    out = tmp_path / "run"
    assert main(["convergence", "--degrees", "6,8,10", "--out", str(out)]) == 0
    rows = read_rows(out / "convergence.csv")
    assert len(rows) == 3 * 2
    manifest = json.loads((out / "convergence.json").read_text())
    assert manifest["config"]["example"] == "example1"
    assert manifest["config"]["seed"] == 0
    assert {"numpy", "scipy", "python"} <= set(manifest["versions"])
    errors = [float(v) for _, m, v in rows if m == "max_error"]
    assert errors == sorted(errors, reverse=True)


def test_convergence_is_deterministic(tmp_path):
    a, b, c = (tmp_path / n for n in "abc")
    args = ["convergence", "--example", "example3", "--degrees", "6,8"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert main(args + ["--out", str(c), "--threads", "2"]) == 0
    first = (a / "convergence.csv").read_bytes()
    assert first == (b / "convergence.csv").read_bytes() == (c / "convergence.csv").read_bytes()


def test_heat_convergence_rows(tmp_path):
    args = ["convergence", "--example", "example4", "--degrees", "6,8", "--dt", "0.125", "--out", str(tmp_path)]
    assert main(args) == 0
    metrics = {m for _, m, _ in read_rows(tmp_path / "convergence.csv")}
    assert metrics == {"max_error_t0.5", "l2_error_t0.5", "max_error_t1", "l2_error_t1"}


def test_sparsity_export(tmp_path):
    assert main(["sparsity", "--preset", "regular", "--degrees", "12", "--out", str(tmp_path)]) == 0
    rows = {m: float(v) for _, m, v in read_rows(tmp_path / "sparsity.csv")}
    assert rows["band_violations_S"] == 0 and rows["band_violations_M"] == 0
    for name in ("S", "M"):
        A = scipy.io.mmread(str(tmp_path / f"{name}_M12.mtx")).tocsr()
        assert A.shape == (165, 165)
        assert A.nnz == A.T.nnz == rows[f"nnz_{name}"]
        assert (A != A.T).nnz == 0


def test_condition_study(tmp_path):
    assert main(["condition", "--degrees", "6,8", "--out", str(tmp_path)]) == 0
    rows = read_rows(tmp_path / "condition.csv")
    assert len(rows) == 2 * 6
    assert all(float(v) >= 1 for _, _, v in rows)


def test_eigen_study(tmp_path):
    assert main(["eigen", "--preset", "fundamental", "--degrees", "8,10", "--out", str(tmp_path)]) == 0
    rows = read_rows(tmp_path / "eigen.csv")
    metrics = {m for _, m, _ in rows}
    assert {"rel_error_mu1", "mu_max", "reliable_fraction", "mu_k", "weyl"} <= metrics
    manifest = json.loads((tmp_path / "eigen.json").read_text())
    assert manifest["summary"]["reference"] == "exact"


def test_gaps_exact(tmp_path):
    assert main(["gaps", "--preset", "fundamental", "--count", "500", "--out", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "gaps.json").read_text())["summary"]
    assert summary["spectrum"] == "exact"
    assert np.isfinite(summary["delta_ave_slope"])


@pytest.mark.parametrize(
    "argv",
    [
        ["convergence", "--degrees", "2"],
        ["convergence", "--preset", "regular", "--degrees", "6"],
        ["eigen", "--degrees", "48"],
        ["gaps", "--preset", "regular"],
        ["condition", "--degrees", "a,b"],
        ["eigen", "--preset", "nowhere"],
    ],
)
def test_usage_errors_emit_json(argv, tmp_path, capsys):
    code = main(argv + ["--out", str(tmp_path)])
    assert code == 2
    error = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert error["error"] == "UsageError" and error["message"]


def test_runtime_error_writes_error_file(tmp_path, capsys):
    flat = ["0", "0", "0", "1", "0", "0", "0", "1", "0", "1", "1", "0"]
    code = main(["condition", "--vertices", *flat, "--degrees", "6", "--out", str(tmp_path)])
    assert code == 1
    error = json.loads((tmp_path / "error.json").read_text())
    assert "degenerate" in error["message"]


def test_console_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "tetspectral", "gaps", "--preset", "fundamental", "--count", "100", "--out", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert json.loads(proc.stdout)["rows"] > 0
