import json
import subprocess
import sys

import pytest

from adversarium import __version__
from adversarium.cli import fan_out, main, worker_count
from adversarium.errors import ParseError
from adversarium.span_programs import or_program


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def report(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


def test_threshold_relation_ratio(capsys):
    rep = report(capsys, "adv", "ratio", "--function", "threshold", "--k", "2", "--n", "3")
    assert rep["ratio"] == pytest.approx(2.0, abs=1e-9)
    assert rep["version"] == __version__ and rep["tolerance"] == 1e-9 and rep["seed"] == 0
    assert rep["command"] == "adv ratio"


def test_ambainis_ratio(capsys):
    rep = report(capsys, "adv", "ratio", "--function", "ambainis", "--weights", "0.75,0.5,0,0")
    assert rep["ratio"] == pytest.approx(2.5, abs=1e-9)


def test_zero_matrix_and_bad_inputs(capsys, tmp_path):
    from adversarium.adversary import AdversaryMatrix
    from adversarium.functions import make_named
    import numpy as np
    f = make_named("or", n=2)
    zero = AdversaryMatrix(f, np.zeros((3, 1)), f.positives, f.negatives)
    path = tmp_path / "zero.json"
    path.write_text(zero.to_json())
    assert run(capsys, "adv", "ratio", "--matrix", str(path))[0] == 3
    assert run(capsys, "adv", "ratio", "--matrix", str(tmp_path / "missing.json"))[0] == 2
    assert run(capsys, "adv", "ratio", "--function", "ambainis", "--weights", "1,2")[0] == 2
    assert run(capsys, "adv", "ratio", "--function", "nope", "--n", "2")[0] == 2


def test_dual_threshold_and_check_round_trip(capsys, tmp_path):
    rep = report(capsys, "dual", "threshold", "--k", "2", "--n", "3")
    assert rep["objective"] == pytest.approx(2.0) and rep["feasible"]
    path = tmp_path / "sol.json"
    path.write_text(json.dumps(rep["solution"]))
    rep = report(capsys, "dual", "check", "--function", "threshold", "--k", "2", "--n", "3",
                 "--solution", str(path))
    assert rep["feasible"]
    # the same solution against the wrong function is a parse error
    assert run(capsys, "dual", "check", "--function", "or", "--n", "3", "--solution", str(path))[0] == 2
    bad = json.loads(path.read_text())
    bad["factors"][0] = [[5.0]] * len(bad["factors"][0])
    path.write_text(json.dumps(bad))
    assert run(capsys, "dual", "check", "--function", "threshold", "--k", "2", "--n", "3",
               "--solution", str(path))[0] == 3


def test_span_commands(capsys, tmp_path):
    path = tmp_path / "or4.json"
    path.write_text(or_program(4).to_json())
    rep = report(capsys, "span", "wsize", "--program", str(path))
    assert (rep["W0"], rep["W1"], rep["wsize"]) == pytest.approx((4.0, 1.0, 2.0))
    assert report(capsys, "span", "eval", "--program", str(path), "--input", "0100")["accepts"]
    assert run(capsys, "span", "eval", "--program", str(path), "--input", "01")[0] == 2
    built = report(capsys, "span", "build", "--family", "maj3")
    assert built["program"]["dim"] == 3


def test_span_simulate_is_deterministic_across_thread_counts(capsys, tmp_path, monkeypatch):
    path = tmp_path / "or2.json"
    path.write_text(or_program(2).to_json())
    argv = ["span", "simulate", "--program", str(path), "--input", "10", "--runs", "6", "--seed", "5"]
    monkeypatch.setenv("ADVERSARIUM_THREADS", "1")
    one = run(capsys, *argv)[1]
    monkeypatch.setenv("ADVERSARIUM_THREADS", "4")
    four = run(capsys, *argv)[1]
    assert one == four
    rep = json.loads(one)
    assert rep["expected"] == 1 and rep["accepted"] >= 4


def test_lg_commands(capsys):
    rep = report(capsys, "lg", "complexity", "--construction", "collision", "--n", "27", "--r", "3")
    assert rep["C_N"] == pytest.approx(51.0) and rep["C_P"] == pytest.approx(2 / 3)
    assert rep["total"] <= 4 * 27 ** (1 / 3)
    rep = report(capsys, "lg", "complexity", "--construction", "or", "--n", "5", "--balance")
    assert rep["total"] == pytest.approx(5 ** 0.5)
    rep = report(capsys, "lg", "dual-check", "--cert", "ksubset", "--n", "8", "--k", "2")
    assert rep["objective"] == 4.0 and rep["constraint_max"] <= 10


def test_lg_dual_check_from_file(capsys, tmp_path):
    from adversarium.learning_graphs import ksubset_certificate
    path = tmp_path / "alpha.json"
    path.write_text(json.dumps(ksubset_certificate(6, 2).to_triples()))
    rep = report(capsys, "lg", "dual-check", "--cert", "ksubset", "--n", "6", "--k", "2",
                 "--alpha", str(path))
    assert rep["objective"] > 0
    path.write_text("{")
    assert run(capsys, "lg", "dual-check", "--cert", "ksubset", "--n", "6", "--alpha", str(path))[0] == 2


def test_lg_simulate(capsys):
    rep = report(capsys, "lg", "simulate", "--construction", "or", "--function", "or", "--n", "3",
                 "--input", "010", "--runs", "20")
    # single-run acceptance is about 0.8
    assert rep["expected"] == 1 and rep["accepted"] >= 10


def test_walk_commands(capsys, tmp_path):
    g = tmp_path / "path3.txt"
    g.write_text("1 2 1\n2 3 1\n")
    rep = report(capsys, "walk", "commute", "--graph", str(g), "--s", "1", "--t", "3")
    assert (rep["lhs"], rep["rhs"]) == pytest.approx((8.0, 8.0))
    assert report(capsys, "walk", "resistance", "--graph", str(g), "--s", "1", "--t", "3")["R"] == \
        pytest.approx(2.0)
    side = tmp_path / "side.json"
    side.write_text('{"sigma": {"1": 1.0}, "marked": ["3"]}')
    assert report(capsys, "walk", "hitting", "--graph", str(g), "--sidecar", str(side))["H"] == \
        pytest.approx(4.0)
    rep = report(capsys, "walk", "run", "--graph", str(g), "--sidecar", str(side), "--runs", "20")
    assert rep["accepted"] >= 10
    assert run(capsys, "walk", "commute", "--graph", str(g), "--s", "1", "--t", "9")[0] == 2
    assert run(capsys, "walk", "resistance", "--graph", str(g))[0] == 2


def test_cert_extract(capsys):
    rep = report(capsys, "cert", "extract", "--function", "or", "--n", "3")
    assert (rep["C0"], rep["C1"]) == (3, 1)


def test_csv_output(capsys, tmp_path):
    out = tmp_path / "r.csv"
    code, _, _ = run(capsys, "adv", "ratio", "--function", "threshold", "--k", "2", "--n", "3",
                     "--format", "csv", "--out", str(out))
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "i,j,value"
    assert any(line.startswith("ratio,0,") for line in lines)


def test_budget_exit(capsys):
    assert run(capsys, "lg", "complexity", "--construction", "collision", "--n", "12", "--r", "2")[0] == 4


def test_worker_count(monkeypatch):
    monkeypatch.setenv("ADVERSARIUM_THREADS", "3")
    assert worker_count() == 3
    assert fan_out(lambda x: x * x, range(10)) == [x * x for x in range(10)]
    monkeypatch.setenv("ADVERSARIUM_THREADS", "many")
    with pytest.raises(ParseError):
        worker_count()


def test_console_entry_point_is_byte_deterministic():
    cmd = [sys.executable, "-m", "adversarium.cli", "dual", "threshold", "--k", "2", "--n", "3"]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert a == b and b"objective" in a
