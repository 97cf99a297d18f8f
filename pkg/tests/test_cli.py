import csv
import io
import json
import subprocess
import sys
from fractions import Fraction

import pytest

from melonheight import cli
from melonheight.errors import DomainError, NumericError
from melonheight.sums import DOUBLESUM_TERMS


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


# --- count / height -----------------------------------------------------------

@pytest.mark.parametrize("argv,want", [
    (["count", "--n", "3", "--p", "2"], "14"),
    (["count", "--n", "2", "--p", "2", "--h", "2"], "0"),
    (["count", "--n", "3", "--p", "1"], "5"),
])
def test_count(capsys, argv, want):
    code, out, _ = run(capsys, *argv)
    assert code == 0 and out.strip() == want


def test_count_usage_errors(capsys):
    with pytest.raises(SystemExit) as e:
        cli.main(["count", "--n", "3"])
    assert e.value.code == 2
    code, _, err = run(capsys, "count", "--n", "0", "--p", "1")
    assert code == 2 and "usage" in err
    code, _, _ = run(capsys, "count", "--n", "3", "--p", "1", "--precision-bits", "20")
    assert code == 2
    code, _, _ = run(capsys, "count", "--n", "3", "--p", "1", "--tol", "-1")
    assert code == 2


def test_height(capsys):
    code, out, _ = run(capsys, "height", "--n", "2", "--p", "2", "--digits", "4")
    assert code == 0 and "11/3" in out and "3.6667" in out
    code, out, _ = run(capsys, "height", "--n", "2", "--p", "1")
    assert code == 0 and "3/2" in out


def test_height_both_routes(capsys):
    code, out, _ = run(capsys, "height", "--n", "30", "--p", "2", "--route", "both", "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert {r["route"] for r in rows} == {"determinant", "sums"}
    assert rows[0]["H_num"] == rows[1]["H_num"]


def test_height_disagreement_exit_3(capsys, monkeypatch):
    monkeypatch.setattr(cli.sums, "avg_height2_sum", lambda n: Fraction(1))
    code, _, err = run(capsys, "height", "--n", "3", "--p", "2", "--route", "both")
    assert code == 3 and "disagree" in err


def test_height_sums_p3(capsys):
    code, _, _ = run(capsys, "height", "--n", "3", "--p", "3", "--route", "sums")
    assert code == 2


# --- rendering ----------------------------------------------------------------

def test_render_half_even():
    assert cli.render_decimal(Fraction(1, 8), 2) == "0.12"
    assert cli.render_decimal(Fraction(3, 8), 2) == "0.38"
    assert cli.render_decimal(Fraction(-11, 3), 4) == "-3.6667"
    assert cli.render_decimal(Fraction(5, 2), 0) == "2"
    assert cli.render_decimal(Fraction(1, 3), 10) == "0.3333333333"


def test_runconfig_validation():
    with pytest.raises(DomainError):
        cli.RunConfig(tol="abc")
    with pytest.raises(DomainError):
        cli.RunConfig(output_format="xml")
    assert cli.RunConfig().tol_value == 1e-12


def test_csv_is_deterministic_and_lf(tmp_path, capsys):
    outs = []
    for i in range(2):
        path = tmp_path / f"c{i}.csv"
        code, _, _ = run(capsys, "convergence", "--n-max", "40", "--step", "10", "--format", "csv", "--out", str(path))
        assert code == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    assert b"\r" not in outs[0]
    header = outs[0].split(b"\n")[0]
    assert header == b"n,H_exact_num,H_exact_den,H_exact,H_asym,q"


def test_json_mirrors_csv(capsys):
    _, c, _ = run(capsys, "convergence", "--n-max", "20", "--step", "10", "--format", "csv")
    _, j, _ = run(capsys, "convergence", "--n-max", "20", "--step", "10", "--format", "json")
    doc = json.loads(j)
    assert doc["rows"] == list(csv.DictReader(io.StringIO(c)))


# --- convergence ----------------------------------------------------------------

def test_convergence_rows(capsys):
    code, out, _ = run(capsys, "convergence", "--n-max", "1000", "--step", "100", "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    q = {int(r["n"]): float(r["q"]) for r in rows}
    assert abs(q[1000] - 1.00734) <= 5e-4
    assert abs(q[1] - 5.1941) < 1e-4
    tail = [q[m] for m in sorted(q) if m >= 100]
    assert all(x > y for x, y in zip(tail, tail[1:]))


def test_convergence_guard(capsys):
    code, _, _ = run(capsys, "convergence", "--n-max", "2001")
    assert code == 2


# --- constants --------------------------------------------------------------------

def test_constants_table(capsys):
    code, out, _ = run(capsys, "constants", "--max-a", "1", "--max-b", "1", "--tol", "1e-8",
                       "--format", "json")
    assert code == 0
    doc = json.loads(out)
    rows = {(int(r["a"]), int(r["b"])): r for r in doc["rows"]}
    assert rows[(0, 0)]["residue_main_coeff"] == "1/4"
    assert abs(float(rows[(0, 0)]["c_ab"]) + 1.5522) < 1e-4
    assert rows[(1, 1)]["residue_half"] == "0"
    assert abs(float(doc["summary"]["K*sqrt(pi)"]) - 2.57758) < 5e-4


def test_constants_numeric_failure(capsys, monkeypatch):
    real = cli.dz.c_const

    def flaky(a, b, *args):
        if (a, b) == (2, 0):
            raise NumericError("quadrature did not converge")
        return real(a, b, *args)

    monkeypatch.setattr(cli.dz, "c_const", flaky)
    code, out, err = run(capsys, "constants", "--tol", "1e-6", "--format", "csv")
    assert code == 4
    assert "quadrature" in err
    # partial table: the rows computed before the failure are still emitted
    assert out.startswith("a,b,") and "\n0,0," in "\n" + out and "K*sqrt" not in out


# --- verify ---------------------------------------------------------------------

def test_verify_quick(capsys):
    code, out, _ = run(capsys, "verify", "--level", "quick")
    assert code == 0
    assert "FAIL" not in out
    assert out.count("PASS") == 8
    assert "INFO Z(0,0;0)" in out


def test_verify_detects_tampered_table():
    terms = list(DOUBLESUM_TERMS)
    m, a, b = terms[7]
    terms[7] = (m + 1, a, b)
    buf = io.StringIO()
    results = cli.run_verify("quick", doublesum_terms=terms, stream=buf)
    status = {r.name: r.ok for r in results}
    assert status["formula-equivalence"] is False
    assert "FAIL formula-equivalence" in buf.getvalue()


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "melonheight", "count", "--n", "4", "--p", "2"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.strip() == "84"
