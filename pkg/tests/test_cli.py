import json
import subprocess
import sys

import numpy as np
import pytest

from twistorlab.cli import main
from twistorlab.leaves import dim12_q
from twistorlab.linalg import matrix_to_json
from twistorlab.pairs import synthesize_partner
from twistorlab.sections import QPolynomial
from twistorlab.twistor import random_point, standard_structure


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


def run(capsys, argv):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def pair8(tmp_path):
    j = standard_structure(8)
    k = synthesize_partner(j, {0.3: 4, 1.0: 2, -1.0: 2})
    return write(tmp_path, "j.json", matrix_to_json(j)), write(tmp_path, "k.json", matrix_to_json(k))


def test_decompose_k_equals_j(tmp_path, capsys):
    j = write(tmp_path, "j.json", matrix_to_json(standard_structure(6)))
    code, out, _ = run(capsys, ["decompose", "--J", j, "--K", j])
    rep = json.loads(out)
    assert code == 0
    assert rep["minus_one_dim"] == 6 and rep["middle"] == []


def test_decompose_bare_rows(tmp_path, capsys, pair8):
    j, _ = pair8
    rows = write(tmp_path, "rows.json", standard_structure(8).tolist())
    code, out, _ = run(capsys, ["decompose", "--J", j, "--K", rows])
    assert code == 0 and json.loads(out)["minus_one_dim"] == 8


def test_validate(tmp_path, capsys, pair8):
    j, k = pair8
    code, out, _ = run(capsys, ["validate", "--J", j, "--K", k])
    assert code == 0 and json.loads(out)["pass"] is True
    bad = write(tmp_path, "bad.json", matrix_to_json(np.eye(4)))
    code, out, _ = run(capsys, ["validate", "--J", bad])
    assert code == 1 and json.loads(out)["J"]["ok"] is False


def test_classify_orbit(capsys, pair8):
    j, k = pair8
    code, out, _ = run(capsys, ["classify-orbit", "--J", j, "--K", k])
    rep = json.loads(out)
    assert code == 0
    assert rep["dimension"] == 11 and rep["model"] == "U(4)/Sp(1) x U(1) x U(1)"


@pytest.mark.parametrize("flavor", ["plain", "unitary"])
def test_dist(tmp_path, capsys, pair8, flavor):
    j, k = pair8
    q = write(tmp_path, "q.json", QPolynomial.from_roots([0.6]).to_json())
    code, out, _ = run(capsys, ["dist", "--J", j, "--K", k, "--Q", q, "--S", "one", "--flavor", flavor])
    rep = json.loads(out)
    assert code == 0 and rep["pass"]
    assert rep["dim"] == len(rep["basis"]) == rep["leaf"]["distribution_dim"]
    assert rep["spec"]["flavor"] == flavor


def test_check_axioms_sigma(capsys):
    code, out, _ = run(capsys, ["check-axioms", "--anchor", "sigma", "--samples", "4", "--points", "2",
                                "--seed", "7"])
    rep = json.loads(out)
    assert code == 0 and rep["pass"]
    assert {r["axiom"] for r in rep["reports"]} >= {"anchor_morphism", "leibniz", "jacobiator"}


def test_check_q_pass_and_fail(tmp_path, capsys):
    q = write(tmp_path, "q.json", dim12_q().to_json())
    code, out, _ = run(capsys, ["check-q", "--dim", "8", "--Q", q, "--E", "UJ"])
    assert code == 0 and json.loads(out)["pass"] is True
    code, out, _ = run(capsys, ["check-q", "--dim", "8", "--Q", q, "--E", "O"])
    assert code == 1 and json.loads(out)["pass"] is False


def test_repro_s2(capsys):
    code, out, _ = run(capsys, ["repro-s2", "--e0", "0.5", "--grid", "12"])
    rows = json.loads(out)
    assert code == 0
    assert {r["case"] for r in rows} == {"1", "2", "3a", "3b", "3c"}


def test_repro_dim12(capsys):
    code, out, _ = run(capsys, ["repro-dim12", "--case", "1a.ii"])
    rep = json.loads(out)
    assert code == 0 and rep["leaf"]["model"] == "U(4)/Sp(2)"
    code, out, _ = run(capsys, ["repro-dim12"])
    assert code == 0 and len(json.loads(out)["cases"]) == 7


def test_text_format(capsys):
    code, out, _ = run(capsys, ["repro-dim12", "--case", "1b", "--format", "text"])
    assert code == 0
    assert "leaf.model: point" in out.splitlines()


@pytest.mark.parametrize("argv", [
    ["repro-dim12", "--case", "9z"],
    ["nonsense"],
    ["dist", "--S", "one"],
    ["check-axioms", "--anchor", "gamma"],
    ["check-q", "--E", "Nope"],
])
def test_usage_errors(capsys, argv):
    code, _, err = run(capsys, argv)
    assert code == 2
    assert err.strip()


def test_malformed_json(tmp_path, capsys):
    p = tmp_path / "broken.json"
    p.write_text("{not json")
    code, out, err = run(capsys, ["decompose", "--J", str(p), "--K", str(p)])
    assert code == 2 and out == ""
    assert len(err.strip().splitlines()) == 1


def test_dimension_mismatch(tmp_path, capsys):
    a = write(tmp_path, "a.json", matrix_to_json(standard_structure(4)))
    b = write(tmp_path, "b.json", matrix_to_json(standard_structure(6)))
    code, _, err = run(capsys, ["decompose", "--J", a, "--K", b])
    assert code == 2 and "dimensional" in err


def test_invalid_structure(tmp_path, capsys):
    a = write(tmp_path, "a.json", matrix_to_json(np.eye(4)))
    code, _, _ = run(capsys, ["decompose", "--J", a, "--K", a])
    assert code == 2


def test_byte_identical_output(tmp_path):
    j = write(tmp_path, "j.json", matrix_to_json(standard_structure(6)))
    k = write(tmp_path, "k.json", matrix_to_json(random_point(6, 11)))
    argv = [sys.executable, "-m", "twistorlab.cli", "dist", "--J", j, "--K", k, "--flavor", "unitary"]
    a = subprocess.run(argv, capture_output=True, check=True).stdout
    b = subprocess.run(argv, capture_output=True, check=True).stdout
    assert a == b and a


@pytest.mark.parametrize("argv", [
    ["classify-orbit"], ["decompose"], ["dist"], ["repro-dim12", "--case", "2"],
])
def test_reports_round_trip(capsys, pair8, argv):
    j, k = pair8
    if argv[0] != "repro-dim12":
        argv = argv + ["--J", j, "--K", k]
    code, out, _ = run(capsys, argv)
    rep = json.loads(out)
    assert json.loads(json.dumps(rep)) == rep
    assert json.dumps(rep, indent=2) == out.rstrip("\n")
