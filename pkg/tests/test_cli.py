import csv
import io
import json
import math
import subprocess
import sys

import pytest

from sgform import audits, cli
from sgform.audits import CriterionResult


def run(argv, capsys):
    status = cli.main(argv)
    out, err = capsys.readouterr()
    return status, out, err


def rows_of(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_graph_level_2_has_twelve_edges(capsys):
    status, out, _ = run(["graph", "--level", "2"], capsys)
    assert status == 0
    rows = rows_of(out)
    assert len(rows) == 12
    assert {r["kind"] for r in rows} <= {"I", "II"}


def test_resistance_level_5(capsys):
    status, out, _ = run(["resistance", "--level", "5"], capsys)
    assert status == 0
    row = next(r for r in rows_of(out) if r["n"] == "5")
    assert float(row["R"]) == pytest.approx((5 / 3) ** 5 - 1, rel=1e-8)


def test_resistance_bound_audit(capsys):
    status, out, _ = run(["resistance", "--level", "3", "--bound-audit"], capsys)
    rows = rows_of(out)
    assert status == 0 and len(rows) == 3 * (27 - 1)
    assert max(float(r["ratio"]) for r in rows) <= 1


def test_gamma_probe(capsys):
    status, out, _ = run(["gamma", "--good", "1,0,0", "--eps", "1e-3"], capsys)
    assert status == 0
    (row,) = rows_of(out)
    target = (4 / 3) / math.log(2)
    assert abs(float(row["value"]) / target - 1) < 0.02
    assert row["verdict"] == "pass"


def test_energy_exact_rows(capsys):
    status, out, _ = run(["energy", "--good", "1,0,0", "--level", "3"], capsys)
    assert status == 0
    rows = rows_of(out)
    assert [r["n"] for r in rows] == ["1", "2", "3"]
    # S = 2 for (1, 0, 0); B_n = (3/5)^n S
    assert rows[1]["B_n"] == "18/25"


def test_besov_columns(capsys):
    status, out, _ = run(["besov", "--depth", "4", "--beta", "1.8,2.0"], capsys)
    assert status == 0
    rows = rows_of(out)
    assert [float(r["beta"]) for r in rows] == [1.8, 2.0]
    for r in rows:
        assert float(r["Ebeta_series_to_depth"]) <= float(r["Ebeta_series"])
        assert float(r["B2inf"]) <= float(r["B22"])


def test_json_mirrors_csv(capsys):
    _, text_csv, _ = run(["resistance", "--level", "3"], capsys)
    _, text_json, _ = run(["resistance", "--level", "3", "--format", "json"], capsys)
    data = json.loads(text_json)
    rows = rows_of(text_csv)
    assert len(data) == len(rows)
    for obj, row in zip(data, rows):
        assert list(obj) == list(row)
        assert obj["R"] == float(row["R"])


def test_out_file_is_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        assert cli.main(["graph", "--level", "3", "--out", str(path)]) == 0
    assert capsys.readouterr().out == ""
    assert a.read_bytes() == b.read_bytes()


@pytest.mark.parametrize("argv", [
    ["nonsense"],
    ["graph", "--level", "0"],
    ["graph", "--level", "9"],
    ["energy", "--good", "1,0"],
    ["energy", "--good", "1,x,0"],
    ["gamma", "--eps", "-1e-3"],
    ["besov", "--beta", "1.2"],
    ["besov", "--depth", "1"],
    ["graph", "--format", "xml"],
])
def test_usage_errors_exit_2(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(argv)
    assert exc.value.code == 2
    assert "usage" in capsys.readouterr().err


def test_level_cap_can_be_raised(capsys):
    with pytest.raises(SystemExit):
        cli.main(["resistance", "--level", "2", "--max-level", "1"])
    capsys.readouterr()
    status, out, _ = run(["resistance", "--level", "2", "--max-level", "2"], capsys)
    assert status == 0 and len(rows_of(out)) == 2


def test_failed_audit_exits_1_and_lists_rows(monkeypatch, capsys):
    bad_row = {"check": "made-up check", "n": 1, "lhs": 2.0, "rhs": 1.0, "ratio": 2.0, "pass": False}
    results = [CriterionResult(1, "ok", True, "fine", [], 0.0),
               CriterionResult(2, "broken", False, "off", [bad_row], 0.0)]
    monkeypatch.setattr(audits, "run_all", lambda **kw: results)
    status, out, err = run(["audit-all"], capsys)
    assert status == 1
    assert [r["pass"] for r in rows_of(out)] == ["True", "False"]
    assert "made-up check" in err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "sgform.cli", "graph", "--level", "1"],
                          capture_output=True, text=True, check=True)
    assert len(rows_of(proc.stdout)) == 3
