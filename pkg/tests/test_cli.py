import json
import subprocess
import sys

import numpy as np
import pytest

from ksupport.cli import fmt, main, parse_exponents, parse_vector
from ksupport.data import Dataset, SyntheticSpec, synthetic_generate, write_csv


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_fmt():
    assert fmt(-0.0) == "0"
    assert fmt(1 / 3) == "0.333333333333"
    assert fmt(2.5e-20) == "2.5e-20"


def test_parsers(tmp_path):
    assert parse_vector("1,2, 3").tolist() == [1.0, 2.0, 3.0]
    f = tmp_path / "v.txt"
    f.write_text("1\n-2\n")
    assert parse_vector(f"@{f}").tolist() == [1.0, -2.0]
    assert parse_exponents("-2:1") == [-2, -1, 0, 1]
    assert parse_exponents("3,5") == [3, 5]
    with pytest.raises(ValueError):
        parse_vector("1,a")


def test_norm_commands(capsys):
    assert run(capsys, "norm", "--vector", "2,1,1", "--k", "2")[:2] == (0, "2.82842712475 r=1\n")
    assert run(capsys, "norm", "--vector=-3,4", "--k", "1.5", "--elastic")[1] == "5.71547606649\n"
    assert run(capsys, "dualnorm", "--vector", "3,-4,1", "--k", "2")[1] == "5\n"
    assert run(capsys, "dualnorm", "--vector", "3,-4,0", "--k", "3", "--elastic")[1] == "5\n"
    assert run(capsys, "prox", "--vector", "3,2,1", "--k", "2", "--beta", "1")[1] == "1.5,1,0\n"


def test_usage_errors(capsys):
    assert run(capsys, "norm", "--vector", "1,1", "--k", "3")[0] == 2
    assert run(capsys, "norm", "--vector", "1,1", "--k", "1.5")[0] == 2
    assert run(capsys, "prox", "--vector", "1,1", "--k", "1", "--beta", "0")[0] == 2
    with pytest.raises(SystemExit) as e:
        main(["norm", "--k", "1"])
    assert e.value.code == 2


@pytest.fixture
def csv_splits(tmp_path):
    tr, va, _, _ = synthetic_generate(SyntheticSpec(seed=4, n_test=0))
    write_csv(tmp_path / "train.csv", tr)
    write_csv(tmp_path / "val.csv", va)
    return tmp_path


def test_fit(capsys, csv_splits):
    code, out, _ = run(capsys, "fit", "--train", str(csv_splits / "train.csv"),
                       "--val", str(csv_splits / "val.csv"), "--method", "ksupport",
                       "--k", "15", "--lambda", "1")
    assert code == 0
    doc = json.loads(out)
    assert len(doc["coefficients"]) == 40 and doc["converged"]
    assert float(doc["objective"]["best"]) <= float(doc["objective"]["initial"])
    assert doc["config"]["k"] == "15"
    assert run(capsys, "fit", "--train", str(csv_splits / "train.csv"),
               "--method", "elastic", "--lambda1", "1")[0] == 2


def test_gridfit(capsys, csv_splits):
    out = csv_splits / "g.json"
    code, _, _ = run(capsys, "gridfit", "--train", str(csv_splits / "train.csv"),
                     "--val", str(csv_splits / "val.csv"), "--method", "lasso",
                     "--lambda-exponents=-1:1", "--out", str(out))
    assert code == 0
    doc = json.loads(out.read_text())
    assert len(doc["cells"]) == 3 and doc["selected"]["lam"] in (0.1, 1.0, 10.0)


def test_io_and_format_errors(capsys, tmp_path):
    assert run(capsys, "fit", "--train", str(tmp_path / "missing.csv"),
               "--method", "lasso", "--lambda", "1")[0] == 3
    bad = tmp_path / "bad.csv"
    bad.write_text("a,y\n1,x\n")
    assert run(capsys, "fit", "--train", str(bad), "--method", "lasso", "--lambda", "1")[0] == 2


def test_numeric_failure_exit_code(capsys, tmp_path, monkeypatch):
    from ksupport import cli
    from ksupport._common import DivergenceError

    def boom(*a, **k):
        raise DivergenceError(3)

    monkeypatch.setattr(cli, "fit", boom)
    write_csv(tmp_path / "t.csv", Dataset(np.eye(3), np.ones(3)))
    assert run(capsys, "fit", "--train", str(tmp_path / "t.csv"),
               "--method", "lasso", "--lambda", "1")[0] == 4


def test_synthetic_command_is_deterministic(tmp_path):
    cmd = [sys.executable, "-m", "ksupport", "synthetic", "--reps", "1", "--seed", "2"]
    a = subprocess.run(cmd + ["--out-dir", str(tmp_path / "a")], capture_output=True, text=True)
    b = subprocess.run(cmd + ["--out-dir", str(tmp_path / "b")], capture_output=True, text=True)
    assert a.returncode == 0 and "k-support" in a.stdout
    for name in ("report.txt", "report.json", "coefficients_ksupport.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
