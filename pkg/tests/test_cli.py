from __future__ import annotations

import csv
import io
import json
import subprocess
import sys

import pytest

import fvbench.fv as fv
from oracles import ma_lists, span_rank
from fvbench.cli import ExperimentConfig, main
from fvbench.properties import PowersOfTwo
from fvbench.structures import disjoint_union, edgeless


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def table(text):
    return list(csv.DictReader(io.StringIO("\n".join(l for l in text.splitlines() if not l.startswith("#")))))


def test_rank_cliques_constant_two(capsys):
    code, out, _ = run(capsys, "rank", "--property", "cliques:periodic:0,2,0", "--op", "disjoint-union",
                       "--schedule", "4,6,8", "--family", "cliques", "--full-upto", "6")
    assert code == 0
    rows = table(out)
    assert [r["rank"] for r in rows] == ["2", "2", "2"]
    assert [r["stabilized"] for r in rows] == ["0", "1", "1"]


def test_rank_cocliques_squares_grows(capsys):
    code, out, _ = run(capsys, "rank", "--property", "cocliques:squares", "--op", "disjoint-union",
                       "--schedule", "4,8,12", "--family", "edgeless", "--full-upto", "4")
    assert code == 0
    assert [int(r["rank"]) for r in table(out)] == [5, 9, 13]


def test_rank_bridge_paths_match_arithmetic_oracle(capsys):
    code, out, _ = run(capsys, "rank", "--property", "paths:pow2", "--op", "bridge-union",
                       "--schedule", "4,6,8,10", "--family", "labeled-paths")
    assert code == 0
    ranks = [int(r["rank"]) for r in table(out)]
    a = PowersOfTwo()
    expected = [span_rank([sum(v << j for j, v in enumerate(row)) for row in ma_lists(lambda k: k in a, n, 1)])
                for n in (4, 6, 8, 10)]
    assert ranks == expected
    assert ranks == sorted(set(ranks))


def test_index_of_zero_property(capsys):
    code, out, _ = run(capsys, "index", "--property", "zero", "--op", "disjoint-union", "--schedule", "2,3")
    assert code == 0
    assert all(r["index"] == "1" and r["rank"] == "0" for r in table(out))


def test_index_is_at_least_rank(capsys):
    _, out, _ = run(capsys, "index", "--property", "paths:squares", "--op", "complement-union", "--schedule", "2,4")
    assert all(int(r["index"]) >= int(r["rank"]) for r in table(out))


def test_rank_json_and_matrix(capsys):
    code, out, _ = run(capsys, "rank", "--property", "cliques:evens", "--op", "disjoint-union",
                       "--schedule", "2,3", "--emit", "json")
    doc = json.loads(out)
    assert code == 0 and doc["verdict"].startswith("stabilized")
    assert len(doc["classes"]) == doc["entries"][-1]["index"] == 3
    _, out, _ = run(capsys, "rank", "--property", "cliques:evens", "--op", "disjoint-union",
                    "--schedule", "2", "--emit", "matrix")
    lines = out.split()
    assert len(lines) == 4 and all(len(l) == 4 and set(l) <= {"0", "1"} for l in lines)


def test_ma(capsys):
    _, out, _ = run(capsys, "ma", "--set", "evens", "--schedule", "7,15")
    assert [(r["rank"], r["bound_ok"]) for r in table(out)] == [("2", "1"), ("2", "1")]
    _, out, _ = run(capsys, "ma", "--set", "squares")
    r = [int(x["rank"]) for x in table(out)]
    assert r[0] < r[1] < r[2]
    _, out, _ = run(capsys, "ma", "--set", "all", "--schedule", "8")
    assert table(out)[0]["rank"] == "1"


def test_smooth(capsys):
    code, out, _ = run(capsys, "smooth", "--op", "complement-union", "--fragment", "MSOL", "--q", "2")
    assert code == 0 and "verdict: pass" in out


def test_smooth_failure_prints_witness(capsys, monkeypatch):
    monkeypatch.setattr(fv, "apply_op", lambda op, a, b, check=True:
                        edgeless(a.size + b.size) if a.size == 2 else disjoint_union(a, b))
    code, out, _ = run(capsys, "smooth", "--op", "disjoint-union", "--q", "2", "--max-size", "3")
    assert code == 1 and "verdict: fail" in out
    assert out.count("size:") == 4


def test_fv_table(capsys, tmp_path):
    code, out, _ = run(capsys, "fv-table", "--op", "disjoint-union", "--sentence", "D[0,2] x. x = x")
    assert code == 0 and "# validated: True" in out
    target = tmp_path / "even.csv"
    code, _, _ = run(capsys, "fv-table", "--op", "disjoint-union", "--sentence", "D[0,2] x. x = x",
                     "--out", str(target))
    rows = table(target.read_text())
    assert len(rows) == 11 ** 2
    types = table((tmp_path / "even.types.csv").read_text())
    assert len(types) == 11


def test_fv_table_refusal(capsys, monkeypatch):
    monkeypatch.setattr(fv, "apply_op", lambda op, a, b, check=True:
                        edgeless(a.size + b.size) if a.size == 2 else disjoint_union(a, b))
    code, out, _ = run(capsys, "fv-table", "--op", "disjoint-union", "--sentence",
                       "exists x. exists y. E(x,y)", "--max-size", "3")
    assert code == 1 and out.startswith("refused")


def test_fv_table_from_file(capsys, tmp_path):
    f = tmp_path / "iso.fo"
    f.write_text("exists x. forall y. ~E(x,y)")
    code, out, _ = run(capsys, "fv-table", "--op", "complement-union", "--formula-file", str(f), "--max-size", "3")
    assert code == 0 and "not associative" in out


def test_four_way_suite_command(capsys):
    code, out, _ = run(capsys, "thm44", "--op", "disjoint-union", "--extra-property", "cocliques:squares")
    assert code == 0 and "# suite: pass" in out
    rows = {r["sentence"]: r for r in table(out)}
    assert rows["connectivity"]["fv_tables"] == "pass"
    assert rows["even-cardinality"]["fv_tables"] == "n/a"
    assert rows["cocliques:squares"]["rank"] == "growing"


def test_enumerate_ops(capsys):
    code, out, _ = run(capsys, "enumerate-ops")
    assert code == 0 and out.rstrip().endswith("# 41 operations")


def test_reproduce_periodicity_suite(capsys):
    code, out, _ = run(capsys, "reproduce", "lemma31")
    assert code == 0
    assert [r["result"] for r in table(out)] == ["pass", "pass"]


@pytest.mark.parametrize("argv", [
    ["rank", "--property", "cliques:evens", "--op", "nope"],
    ["rank", "--property", "cliques:cubes", "--op", "disjoint-union"],
    ["rank", "--property", "cliques:evens", "--op", "disjoint-union", "--schedule", "4,3"],
    ["rank", "--property", "cliques:evens", "--op", "disjoint-union", "--schedule", "9"],
    ["rank", "--property", "cliques:evens", "--op", "bridge-union", "--family", "cliques", "--schedule", "3"],
    ["rank", "--property", "cliques:evens"],
    ["smooth", "--op", "disjoint-union", "--fragment", "SOL"],
    ["fv-table", "--op", "disjoint-union"],
    ["fv-table", "--op", "disjoint-union", "--sentence", "exists x E(x,x)"],
    ["rank", "--property", "cliques:evens", "--op-file", "/nonexistent.op"],
])
def test_usage_errors_exit_two(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and err.startswith("fvbench: error:")


def test_argparse_errors_exit_two(capsys):
    with pytest.raises(SystemExit) as info:
        main(["reproduce", "nope"])
    assert info.value.code == 2


def test_config_round_trip_and_rerun(capsys, tmp_path):
    cfg_path = tmp_path / "cfg.json"
    argv = ["rank", "--property", "paths:squares", "--op", "complement-union", "--schedule", "2,3,4"]
    code, first, _ = run(capsys, *argv, "--save-config", str(cfg_path))
    assert code == 0
    cfg = ExperimentConfig.from_json(cfg_path.read_text())
    assert ExperimentConfig.from_json(cfg.to_json()) == cfg
    _, second, _ = run(capsys, "run", str(cfg_path))
    _, third, _ = run(capsys, *argv)
    assert first == second == third
    bad = tmp_path / "bad.json"
    bad.write_text('{"command": "rank", "colour": 1}')
    assert run(capsys, "run", str(bad))[0] == 2


def test_out_flag(capsys, tmp_path):
    target = tmp_path / "r.csv"
    code, out, _ = run(capsys, "ma", "--set", "odds", "--schedule", "6", "--out", str(target))
    assert code == 0 and out == ""
    assert table(target.read_text())[0]["rank"] == "2"


def test_console_entry_point():
    r = subprocess.run([sys.executable, "-m", "fvbench.cli", "ma", "--set", "evens", "--schedule", "5"],
                       capture_output=True, text=True, check=False)
    assert r.returncode == 0 and r.stdout.startswith("n,rank,index,bound_ok")
