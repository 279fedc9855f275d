import csv
import io
import json
import os
import subprocess
import sys

import pytest

from conftest import Q1_BANZHAF, q1
from provattr.cli import main, percentile_summary
from provattr.io import save_lineage

from test_io import Q2_JSON


@pytest.fixture
def q1_file(tmp_path):
    p = tmp_path / "q1.json"
    save_lineage(q1(), p)
    return p


def rows(path):
    with open(path, newline="") as fh:
        return {r["variable"]: r for r in csv.DictReader(fh)}


def test_banzhaf_to_csv(q1_file, tmp_path):
    out = tmp_path / "out.csv"
    assert main(["banzhaf", "-i", str(q1_file), "-o", str(out)]) == 0
    got = {x: int(r["banzhaf"]) for x, r in rows(out).items()}
    assert got == Q1_BANZHAF


def test_no_lift_gives_same_values(q1_file, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(["shapley", "-i", str(q1_file), "-o", str(a)])
    main(["shapley", "-i", str(q1_file), "-o", str(b), "--no-lift"])
    assert a.read_text() == b.read_text()


def test_gen_pipe_oracle_matches_gradient(tmp_path, monkeypatch, capsys):
    assert main(["gen", "--vars", "8", "--clauses", "6", "--width", "3", "--seed", "1"]) == 0
    text = capsys.readouterr().out
    results = []
    for method in ("oracle", "gradient"):
        monkeypatch.setattr(sys, "stdin", io.StringIO(text))
        assert main(["banzhaf", "--method", method]) == 0
        results.append(capsys.readouterr().out)
    assert results[0] == results[1]


def test_counts_method_and_json(tmp_path, capsys):
    p = tmp_path / "q2.json"
    p.write_text(json.dumps(Q2_JSON))
    assert main(["shapley", "-i", str(p), "--method", "counts", "--format", "json"]) == 0
    counts = json.loads(capsys.readouterr().out)["shapley"]
    assert main(["oracle", "-i", str(p), "--format", "json"]) == 0
    assert json.loads(capsys.readouterr().out)["shapley"] == counts


def test_compile_stats_and_dot(q1_file, tmp_path, capsys):
    dot = tmp_path / "t.dot"
    assert main(["compile", "-i", str(q1_file), "--dot", str(dot), "--stats"]) == 0
    assert capsys.readouterr().out.startswith("size=14 ")
    assert dot.read_text().startswith("digraph")


@pytest.mark.parametrize("argv,code", [
    (["banzhaf", "-i", "does-not-exist.json"], 2),
    (["frobnicate"], 2),
    (["gen", "--vars", "2", "--clauses", "2", "--width", "3"], 2),
])
def test_error_exit_codes(argv, code, capsys):
    assert main(argv) == code
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 1 and err[0].startswith(f"ERROR[{code}]: ")


def test_counts_rejected_for_boolean(q1_file, capsys):
    assert main(["banzhaf", "-i", str(q1_file), "--method", "counts"]) == 2
    assert capsys.readouterr().err.startswith("ERROR[2]:")


def test_timeout_exit_code(tmp_path, capsys):
    p = tmp_path / "big.json"
    assert main(["gen", "--vars", "60", "--clauses", "60", "--width", "3",
                 "--duplication", "3", "--seed", "4", "-o", str(p)]) == 0
    assert main(["banzhaf", "-i", str(p), "--timeout-secs", "0"]) == 3
    assert capsys.readouterr().err.startswith("ERROR[3]:")


def test_internal_error_exit_code(q1_file, monkeypatch, capsys):
    import provattr.cli as cli

    def broken(*a, **k):
        raise AssertionError("boom")
    monkeypatch.setattr(cli, "attribute", broken)
    assert main(["banzhaf", "-i", str(q1_file)]) == 4
    assert capsys.readouterr().err.startswith("ERROR[4]:")


def test_bench(tmp_path, capsys, monkeypatch):
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    for seed in range(4):
        main(["gen", "--vars", "6", "--clauses", "6", "--width", "3",
              "--duplication", "2", "--seed", str(seed), "-o", str(corpus / f"i{seed}.json")])
    (corpus / "bad.json").write_text("{")
    monkeypatch.setenv("ATTR_JOBS", "2")
    outs = []
    for _ in range(2):
        assert main(["bench", "--dir", str(corpus)]) == 0
        cap = capsys.readouterr()
        outs.append(list(csv.DictReader(io.StringIO(cap.out))))
        assert "p50=" in cap.err and "p99=" in cap.err and "max=" in cap.err
    strip = lambda rs: [{k: v for k, v in r.items() if k != "runtime_secs"} for r in rs]
    assert strip(outs[0]) == strip(outs[1])
    status = {r["instance"]: r["status"] for r in outs[0]}
    assert status["bad.json"] == "input_error" and status["i0.json"] == "ok"
    assert main(["bench", "--dir", str(corpus), "--jobs", "1"]) == 0


def test_bench_errors(tmp_path, monkeypatch):
    assert main(["bench", "--dir", str(tmp_path / "nope")]) == 2
    (tmp_path / "x.json").write_text('{"type":"dnf","clauses":[["x"]]}')
    monkeypatch.setenv("ATTR_JOBS", "many")
    assert main(["bench", "--dir", str(tmp_path)]) == 2


def test_percentiles():
    s = percentile_summary([1.0, 2.0, 3.0, 4.0])
    assert s["p50"] == 2.5 and s["max"] == 4.0
    assert percentile_summary([]) == {}


def test_module_entry_point(q1_file):
    proc = subprocess.run([sys.executable, "-m", "provattr", "banzhaf", "-i", str(q1_file)],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "m3,24" in proc.stdout
