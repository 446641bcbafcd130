import io
import json
import subprocess
import sys


from knotss.cli import main
from knotss.spectral import read_report_csv


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def test_e1_table():
    code, text = run("e1", "--parity", "odd", "--max-p", "2")
    assert code == 0
    cells = {(c["p"], c["m"]): c["dimE1"] for c in json.loads(text)["cells"]}
    assert cells[(1, 1)] == 1 and cells[(2, 2)] == 3
    _, even = run("e1", "--parity", "even", "--max-p", "2")
    assert json.loads(even)["cells"] == json.loads(text)["cells"]
    code, csv_text = run("e1", "--max-p", "2", "--format", "csv")
    assert read_report_csv(csv_text)[0] == {"p": 1, "m": 1, "dimE1": 1}


def test_usage_errors():
    assert run("e1", "--max-p", "0")[0] == 2
    assert run("e2", "--coeff", "F:4")[0] == 2
    assert run("bogus")[0] == 2
    assert run("vanish", "--which", "cohomology", "--N", "3")[0] == 2
    assert run("trees", "ynd", "--n", "1", "--d", "2")[0] == 2


def test_cap_exit(monkeypatch):
    monkeypatch.setenv("KNOTSS_MAX_CELLS", "10")
    assert run("e1", "--max-p", "4")[0] == 3
    assert run("trees", "psi", "--n", "12")[0] == 3


def test_e2_report(schema):
    code, text = run("e2", "--parity", "odd", "--max-p", "3", "--coeff", "Q")
    assert code == 0
    schema("e2report", json.loads(text))
    q = {(c["p"], c["m"]): c["rankE2"] for c in json.loads(text)["cells"]}
    _, f5 = run("e2", "--parity", "odd", "--max-p", "3", "--coeff", "F:5")
    assert all(c["rankE2"] >= q[(c["p"], c["m"])] for c in json.loads(f5)["cells"])
    code, text = run("e2", "--max-p", "5")
    assert all(r["chiE1"] == r["chiE2"] for r in json.loads(text)["euler"])


def test_e2_workers_and_csv_deterministic():
    _, a = run("e2", "--max-p", "5", "--coeff", "Z", "--format", "csv")
    _, b = run("e2", "--max-p", "5", "--coeff", "Z", "--format", "csv", "--workers", "3")
    assert a == b


def test_vanish():
    assert run("vanish", "--which", "cohomology", "--N", "3", "--p", "2", "--q", "2") == (0, "true\n")
    assert run("vanish", "--which", "homotopy", "--m", "4", "--p", "3", "--q", "4") == (0, "true\n")
    assert run("vanish", "--which", "cohomology", "--N", "3", "--p", "2", "--q", "3") == (0, "false\n")
    assert run("vanish", "--which", "cohomology-general", "--m", "4", "--k", "1", "--p", "2", "--q", "2") == (0, "true\n")


def test_trees_commands(schema):
    assert run("trees", "associahedron", "--n", "2") == (0, "5 5 1\n")
    code, text = run("trees", "ynd", "--n", "2", "--d", "1", "--homology")
    assert code == 0 and "reduced ranks 0 0 0" in text and "torsion none" in text
    code, text = run("trees", "psi", "--n", "4", "--planar", "--format", "json")
    assert code == 0
    schema("poset", json.loads(text))
    assert len(json.loads(text)["objects"]) == 11


def test_trees_cofinal_reports_missing_terminal_objects():
    code, text = run("trees", "cofinal", "--n", "2")
    assert code == 0 and text.endswith("terminal object found for all S\n")
    code, text = run("trees", "cofinal", "--n", "4")
    assert code == 4
    assert "no terminal object" in text and "comma category contractible: True" in text
    assert "contractible: False" not in text


def test_verify_all():
    code, text = run("verify", "--suite", "all", "--max-p", "4")
    assert code == 0, text
    assert text.endswith("0 failed\n")


def test_verify_oracle_suite():
    code, text = run("verify", "--suite", "oracle", "--max-p", "5")
    assert code == 0
    assert "PASS basis = Poincare = relation span p<=5 odd" in text


def test_injected_sign_error_is_caught():
    code, text = run("verify", "--suite", "identities", "--max-p", "4", "--inject-sign-error", "2")
    assert code == 4
    assert "FAIL d1^2=0" in text and "first failure (p,m)=" in text
    assert run("e2", "--max-p", "4", "--inject-sign-error", "2")[0] == 4


def test_console_script():
    proc = subprocess.run(
        [sys.executable, "-m", "knotss.cli", "vanish", "--which", "homotopy", "--m", "5", "--p", "2", "--q", "4"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0 and proc.stdout == "false\n"
