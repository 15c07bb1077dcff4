import json
import subprocess
import sys

import pytest

from resodisc.cli import dumps, main, read_config, UsageError

PHI_6 = "besselj(1, 7.015586669815619*r)*cos(theta)"
C_NS = "7.372284554848957"  # 4 J_12 / ||phi_6||^2, so lhs = 2 rhs


def _run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_jnm_prints_example_value(capsys):
    code, out, _ = _run(capsys, "jnm", "1", "2", "--radius", "1")
    assert code == 0
    assert json.loads(out)["J_nm"] == pytest.approx(0.260759, abs=1e-5)


def test_eig_square_includes_325(capsys):
    code, out, _ = _run(capsys, "eig", "square", "--mult", "6", "--max", "400")
    assert code == 0 and 325 in json.loads(out)["eigenvalues"]


def test_eig_list(capsys):
    code, out, _ = _run(capsys, "eig", "list", "--radius", "1", "--count", "6")
    rows = json.loads(out)["eigenvalues"]
    assert [(r["n"], r["m"]) for r in rows] == [(0, 1), (1, 1), (2, 1), (0, 2), (3, 1), (1, 2)]


def test_bessel_zero(capsys):
    code, out, _ = _run(capsys, "bessel", "zero", "0", "1")
    assert json.loads(out)["alpha"] == pytest.approx(2.404825557695773, abs=1e-15)


def test_check_zero_forcing_is_solvable(capsys):
    code, out, _ = _run(capsys, "check", "--f", "0", "--mode", "6", "--exit-verdict")
    assert code == 0 and json.loads(out)["verdict"] == "Solvable"


def test_check_exit_verdict_codes(capsys):
    code, out, _ = _run(capsys, "check", "--f", f"{C_NS}*{PHI_6}", "--mode", "1,2", "--exit-verdict")
    assert code == 3 and json.loads(out)["verdict"] == "NotSolvable"
    code, out, _ = _run(capsys, "check", "--f", f"{C_NS}*{PHI_6}", "--mode", "1,2")
    assert code == 0
    code, out, _ = _run(capsys, "check", "--f", f"{C_NS}*{PHI_6}", "--mode", "1,2",
                        "--tie-tol", "10", "--exit-verdict")
    assert code == 4


def test_project(capsys):
    code, out, _ = _run(capsys, "project", "--f", PHI_6, "--mode", "1,2")
    doc = json.loads(out)
    assert doc["A_k"] == pytest.approx(0.14148078464380634, abs=1e-12)


@pytest.mark.parametrize("argv", [
    ["check", "--f", "x*+2", "--mode", "6"],
    ["check", "--f", "0"],
    ["check", "--f", "0", "--mode", "4"],
    ["check", "--f", "0", "--mode", "abc"],
    ["check", "--f", "0", "--mode", "6", "--radius", "-1"],
    ["solve", "--f", "0", "--mode", "6", "--tol", "0"],
    ["nonsense"],
    [],
    ["jnm", "0", "1"],
])
def test_usage_errors(capsys, argv):
    code, out, err = _run(capsys, *argv)
    assert code == 1
    assert err.startswith("error:")
    assert out == ""


def test_strict_g(capsys):
    code, _, err = _run(capsys, "check", "--f", "0", "--mode", "6", "--g", "u")
    assert code == 0 and "warning:" in err
    code, _, err = _run(capsys, "check", "--f", "0", "--mode", "6", "--g", "u", "--strict-g")
    assert code == 1 and "error:" in err


def test_numerical_failure_exit_code(capsys):
    code, _, err = _run(capsys, "project", "--f", "log(x - 2)", "--mode", "6")
    assert code == 2 and err.startswith("error:")


def test_config_merge_and_byte_identical_reports(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(f"# solvable setting\nmode = 6\nf = 0.1*{PHI_6}\nnmax = 4\nmmax = 4\n")
    code, first, _ = _run(capsys, "--config", str(cfg), "solve")
    assert code == 0 and json.loads(first)["converged"]
    _, second, _ = _run(capsys, "--config", str(cfg), "solve")
    assert first == second
    _, override, _ = _run(capsys, "--config", str(cfg), "solve", "--nmax", "3")
    assert len(json.loads(override)["field"]["coefficients"]) == 3 * 2 * 4 + 4


def test_config_errors(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = blue\n")
    with pytest.raises(UsageError):
        read_config(str(bad))
    bad.write_text("nmax = many\n")
    with pytest.raises(UsageError):
        read_config(str(bad))
    good = tmp_path / "good.cfg"
    good.write_text("strict-g = yes\ntie_tol = 1e-6\n")
    assert read_config(str(good)) == {"strict_g": True, "tie_tol": 1e-6}


def test_heat_writes_trace(tmp_path, capsys):
    out_csv = tmp_path / "trace.csv"
    code, out, _ = _run(capsys, "heat", "--f", f"{C_NS}*{PHI_6}", "--mode", "6", "--nmax", "3", "--mmax", "3",
                        "--dt", "0.01", "--tend", "1", "--out", str(out_csv), "--stable-subspace")
    doc = json.loads(out)
    assert code == 0 and doc["steps"] == 100
    assert doc["H_end"] <= doc["drift_bound"]
    assert out_csv.read_text().splitlines()[0] == "t,H"


def test_report_file(tmp_path, capsys):
    path = tmp_path / "r.json"
    code, out, _ = _run(capsys, "check", "--f", "x", "--mode", "6", "--report", str(path))
    assert path.read_text() == out


def test_dumps_uses_17_significant_digits():
    assert dumps({"a": 0.1, "b": [1, float("nan")], "c": True, "d": None, "e": "x"}) == \
        '{"a": 0.10000000000000001, "b": [1, null], "c": true, "d": null, "e": "x"}'
    x = 0.2607591508593732
    assert float(json.loads(dumps({"x": x}))["x"]) == x


def test_module_entry_point_and_selftest():
    proc = subprocess.run([sys.executable, "-m", "resodisc", "selftest"], capture_output=True, text=True, timeout=300)
    assert proc.returncode == 0, proc.stderr
    doc = json.loads(proc.stdout)
    assert doc["passed"] and len(doc["checks"]) >= 10
    assert all(line.startswith("[PASS]") for line in proc.stderr.splitlines())
