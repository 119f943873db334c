import csv
import json
import subprocess
import sys

import pytest

from tvdual import harness
from tvdual.cli import main


def _rows(path_or_text):
    text = path_or_text.read_text() if hasattr(path_or_text, "read_text") else path_or_text
    return list(csv.DictReader(text.splitlines()))


@pytest.fixture
def config(tmp_path):
    f = tmp_path / "cfg.json"
    f.write_text(json.dumps({"n": 5, "pi": 0.8, "iters": 60, "step": 0.03, "seed": 1,
                             "graph_seed": 2, "algorithm": "panda", "B": 1}))
    return f


def test_run_writes_trace_sidecar_and_optimum(tmp_path, config):
    out = tmp_path / "run" / "trace.csv"
    assert main(["run", "--config", str(config), "--out", str(out)]) == 0
    rows = _rows(out)
    assert len(rows) == 61 and list(rows[0])[:7] == list(harness.TRACE_COLUMNS)[:7]
    meta = json.loads(out.with_suffix(".json").read_text())
    assert meta["algorithm"] == "panda" and "delta" in meta["contraction"]
    opt = json.loads(out.with_suffix(".opt.json").read_text())
    assert {"x_star", "y_star", "mu", "L"} <= set(opt)


def test_run_then_diagnose(tmp_path, config, capsys):
    out = tmp_path / "trace.csv"
    main(["run", "--config", str(config), "--out", str(out)])
    capsys.readouterr()
    rc = main(["diagnose", "--trace", str(out), "--opt", str(out.with_suffix(".opt.json")),
               "--lambda", "0.999", "--delta", "0.5"])
    assert rc == 0
    rows = _rows(capsys.readouterr().out)
    assert [r["arrow"] for r in rows] == ["A1", "A2", "A3", "A4", "A5"]
    assert set(rows[0]) == {"arrow", "gamma", "omega", "lhs", "rhs", "slack"}
    assert float(rows[0]["slack"]) >= 0


def test_diagnose_bad_lambda_reports_one_line(tmp_path, config, capsys):
    out = tmp_path / "trace.csv"
    main(["run", "--config", str(config), "--out", str(out)])
    capsys.readouterr()
    rc = main(["diagnose", "--trace", str(out), "--opt", str(out.with_suffix(".opt.json")),
               "--lambda", "0.3", "--delta", "0.5"])
    err = capsys.readouterr().err
    assert rc != 0 and err.count("\n") == 1 and "undefined" in err


def test_rate_single_step(capsys):
    assert main(["rate", "--mu", "1", "--L", "1", "--delta", "0", "--B", "1", "--c", "0.1"]) == 0
    (row,) = _rows(capsys.readouterr().out)
    assert float(row["lambda"]) == pytest.approx(0.95 ** 0.5)
    assert row["feasible"] == "1"


def test_rate_sweep(tmp_path):
    out = tmp_path / "rate.csv"
    assert main(["rate", "--mu", "1", "--L", "2", "--delta", "0.3", "--sweep", "0.001:0.1:12",
                 "--out", str(out)]) == 0
    rows = _rows(out)
    assert list(rows[0]) == ["c", "lambda", "gamma1", "gamma2", "gamma3", "gamma4", "gamma5",
                             "product", "feasible"]
    assert 0 < len(rows) <= 12


def test_rate_infeasible_step(capsys):
    assert main(["rate", "--mu", "1", "--L", "1", "--delta", "0", "--c", "0.7"]) == 1
    assert "infeasible" in capsys.readouterr().err


def test_rate_no_contraction(capsys):
    assert main(["rate", "--mu", "1", "--L", "1", "--delta", "1", "--c", "0.1"]) == 1
    assert "no contraction" in capsys.readouterr().err


def test_sweep_command(tmp_path, config, capsys):
    out = tmp_path / "sweep.csv"
    assert main(["sweep", "--config", str(config), "--seeds", "0..2", "--out", str(out)]) == 0
    rows = _rows(out)
    assert [int(r["seed"]) for r in rows] == [0, 1, 2]
    assert "median_final_rel_error" in capsys.readouterr().err


def test_missing_config_fails(tmp_path, capsys):
    assert main(["run", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path / "x.csv")]) == 1
    assert capsys.readouterr().err.startswith("tvdual run: error:")


def test_module_entry_point(tmp_path, config):
    out = tmp_path / "t.csv"
    proc = subprocess.run([sys.executable, "-m", "tvdual", "run", "--config", str(config),
                           "--out", str(out)], capture_output=True, text=True)
    assert proc.returncode == 0 and out.exists()
    bad = subprocess.run([sys.executable, "-m", "tvdual", "sweep", "--config", str(config),
                          "--seeds", "3..1"], capture_output=True, text=True)
    assert bad.returncode != 0
