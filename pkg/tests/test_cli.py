import csv
import io
import json
import subprocess
import sys

import jsonschema
import numpy as np
import pytest

from qflat import cli
from qflat.dirac import continuum_dirac_schwinger
from qflat.interacting import fundamental_length, wick_two_point
from qflat.scalar import continuum_schwinger


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_converge_scalar_table_and_verdict(capsys):
    code, out, err = run(capsys, "converge-scalar", "--M", "2", "4")
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == cli.CONVERGE_HEADER
    assert rows[0] == "M,N,x0,x1,x2,x3,lattice_re,lattice_im,continuum_re,continuum_im,abs_err,rel_err".split(",")
    assert len(rows) == 3
    rel = [float(r[-1]) for r in rows[1:]]
    expected = 0 if (rel[1] <= rel[0] and rel[1] < 0.05) else 1
    assert code == expected
    assert ("PASS" if expected == 0 else "FAIL") in err


def test_converge_scalar_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(capsys, "converge-scalar", "--M", "2", "--threads", "1", "--threshold", "1", "--out", str(a))[0] == 0
    assert run(capsys, "converge-scalar", "--M", "2", "--threads", "1", "--threshold", "1", "--out", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_usage_errors(capsys):
    assert run(capsys, "converge-scalar", "--M")[0] == 2
    code, _, err = run(capsys, "converge-scalar", "--x", "0,1,0,0")
    assert code == 2 and "x0" in err
    assert run(capsys, "converge-scalar", "--format", "xml")[0] == 2
    assert run(capsys, "converge-dirac", "--M", "2", "--N", "1", "2")[0] == 2
    assert run(capsys, "converge-scalar", "--M", "0")[0] == 2
    assert run(capsys, "npoint", "--points", "0,0,0")[0] == 2
    assert run(capsys, "npoint", "--signs", "-,x")[0] == 2
    assert run(capsys)[0] == 2


def test_config_overrides_flags(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"M": [], "mass": 2.0}))
    code, _, err = run(capsys, "converge-scalar", "--M", "2", "--config", str(cfg))
    assert code == 2 and "empty" in err
    cfg.write_text(json.dumps({"bogus": 1}))
    assert run(capsys, "converge-scalar", "--config", str(cfg))[0] == 2
    assert run(capsys, "converge-scalar", "--config", str(tmp_path / "missing.json"))[0] == 2
    cfg.write_text(json.dumps({"M": 2, "threshold": 10.0, "format": "json"}))
    code, out, _ = run(capsys, "converge-scalar", "--config", str(cfg))
    assert code == 0 and json.loads(out)["rows"][0]["M"] == 2


def test_converge_dirac_json(capsys):
    code, out, err = run(capsys, "converge-dirac", "--M", "2", "--format", "json", "--threshold", "100")
    data = json.loads(out)
    assert code == 0 and data["pass"]
    row = data["rows"][0]
    lat = np.array([[complex(*v) for v in r] for r in row["lattice"]])
    con = np.array([[complex(*v) for v in r] for r in row["continuum"]])
    assert row["rel_err"] == pytest.approx(np.max(np.abs(lat - con)) / np.max(np.abs(con)))
    assert data["doubling"]["central"] == 16
    assert "doubling" in err


def test_npoint_default_two_point(capsys):
    code, out, _ = run(capsys, "npoint", "--format", "json")
    assert code == 0
    data = json.loads(out)
    jsonschema.validate(data, cli.NPOINT_SCHEMA)
    assert json.loads(json.dumps(data)) == data
    x = np.array([1.0, 0, 0, 0])
    expected = wick_two_point(1.0, continuum_schwinger(1.0, x)) * continuum_dirac_schwinger(1.0, x)[0, 0]
    assert complex(*data["value"]) == pytest.approx(expected, rel=1e-13)
    assert data["analytic"] is True


def test_npoint_analyticity_violation(capsys):
    eps = 0.5 * fundamental_length(1.0)
    code, out, err = run(capsys, "npoint", "--points", "0,0,0,0;0,0,0,0", "--eps", str(eps), "--format", "json")
    assert code == 1
    data = json.loads(out)
    jsonschema.validate(data, cli.NPOINT_SCHEMA)
    assert data["analytic"] is False and data["value"] is None
    assert data["worst_pair"]["distance"] == pytest.approx(eps)
    assert "pair [0, 1]" in err and "distance" in err


def test_npoint_wightman_csv(capsys):
    eps = 2 * fundamental_length(1.0)
    code, out, _ = run(capsys, "npoint", "--points", "0.2,0,0,0;0,0.1,0,0", "--eps", str(eps), "--spinors", "")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == cli.NPOINT_HEADER
    assert [r[0] for r in rows[1:]] == ["det", "P_n", "det_factor", "value"]


def test_oracle_suite(capsys):
    code, out, err = run(capsys, "oracle")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0
    assert rows[0] == cli.ORACLE_HEADER
    assert len(rows) - 1 == len(cli.ORACLE_CHECKS)
    assert all(r[3] == "PASS" for r in rows[1:])


def test_oracle_detects_perturbation(capsys):
    code, out, err = run(capsys, "oracle", "--inject-perturbation", "--format", "json")
    data = json.loads(out)
    assert code == 1
    assert len(data["checks"]) == len(cli.ORACLE_CHECKS)
    assert data["failed"] and "dirac_inverse_times_symbol" in err


def test_doubling_table(capsys):
    code, out, _ = run(capsys, "doubling", "--M", "2")
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == cli.DOUBLING_HEADER
    counts = {r[2]: int(r[3]) for r in rows[1:]}
    assert counts["central"] == 16
    assert code == (0 if counts["forward_backward"] == 1 else 1)


def test_contour_command(capsys):
    code, out, err = run(capsys, "contour", "--nodes", "24", "--format", "json", "--threshold", "0.1")
    data = json.loads(out)
    assert len(data["rows"]) == 3
    assert code == (0 if data["max_pairwise"] < 0.1 else 1)
    assert run(capsys, "contour", "--eps", "-1")[0] == 2
    # below the fundamental length the kernel is not analytic
    assert run(capsys, "contour", "--eps", "0.1", "--nodes", "4")[0] == 1


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "qflat.cli", "converge-scalar", "--M"], capture_output=True, text=True)
    assert out.returncode == 2


def test_dash_leading_values(capsys):
    code, out, _ = run(capsys, "npoint", "--points", "-1,0,0,0;0,0,0,0", "--signs", "-,+", "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert data["signs"] == ["-", "+"] and data["points"][0][0] == [-1.0, 0.0]
    assert run(capsys, "converge-scalar", "--x", "-1,0,0,0", "--M", "2", "--threshold", "1")[0] == 0
