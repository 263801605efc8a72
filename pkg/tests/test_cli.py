from __future__ import annotations

import csv
import json
import re

import pytest

from conftest import FOUR_VIEW_GVDL, line_graph
from viewgraph.cli import main
from viewgraph.data import CALLS_EDGES, CALLS_NODES
from viewgraph.materialize import read_eds
from viewgraph.store import dump_graph


@pytest.fixture
def ws(tmp_path, monkeypatch):
    monkeypatch.setenv("VIEWGRAPH_HOME", str(tmp_path / "ws"))
    return tmp_path


def vg(*argv) -> int:
    return main([str(a) for a in argv])


@pytest.fixture
def loaded(ws):
    g = line_graph(200)
    dump_graph(g, ws / "n.csv", ws / "e.csv")
    assert vg("load", "Calls", ws / "n.csv", ws / "e.csv") == 0
    (ws / "four.gvdl").write_text(FOUR_VIEW_GVDL)
    return ws


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_load_and_duplicate(ws, capsys):
    assert vg("load", "C", CALLS_NODES, CALLS_EDGES) == 0
    assert "|V|=8" in capsys.readouterr().out
    assert vg("load", "C", CALLS_NODES, CALLS_EDGES) == 2
    assert "already registered" in capsys.readouterr().err
    assert vg("load", "D", ws / "missing.csv", CALLS_EDGES) == 2


@pytest.mark.parametrize("ordering,want", [("default", 540), ("optimized", 260)])
def test_create_reports_diff_count(loaded, capsys, ordering, want):
    assert vg("create", loaded / "four.gvdl", "--ordering", ordering) == 0
    out = capsys.readouterr().out
    assert f"#diffs = {want}" in out and re.search(r"CCT = [\d.]+ ms", out)
    eds = read_eds(loaded / "ws" / "collections" / "call-analysis" / "eds.csv", ("GV1", "GV2", "GV3", "GV4"))
    assert eds.total == want


def test_random_ordering_is_deterministic(loaded, capsys):
    outs = []
    for name in ("a", "b"):
        (loaded / f"{name}.gvdl").write_text(FOUR_VIEW_GVDL.replace("call-analysis", name))
        assert vg("create", loaded / f"{name}.gvdl", "--ordering", "random:7") == 0
        outs.append(re.search(r"order (\S+)", capsys.readouterr().out).group(1))
    assert outs[0] == outs[1]


def test_create_twice_is_rejected(loaded, capsys):
    assert vg("create", loaded / "four.gvdl") == 0
    assert vg("create", loaded / "four.gvdl") == 2


def test_create_errors(loaded, capsys):
    (loaded / "bad.gvdl").write_text("create view collection x on Calls [GV1: nope > 1]")
    assert vg("create", loaded / "bad.gvdl") == 2
    (loaded / "bad2.gvdl").write_text("create view collection x on Nowhere [GV1: ID > 1]")
    assert vg("create", loaded / "bad2.gvdl") == 2
    (loaded / "bad3.gvdl").write_text("create view collection x on Calls [GV1: ID >")
    assert vg("create", loaded / "bad3.gvdl") == 2


@pytest.mark.parametrize("alg", ["wcc", "sssp", "pr"])
def test_diff_and_scratch_agree(loaded, capsys, alg):
    assert vg("create", loaded / "four.gvdl") == 0
    assert vg("run", "call-analysis", alg, "--mode", "diff", "--name", "d") == 0
    assert "#diffs = 260" in capsys.readouterr().out
    assert vg("run", "call-analysis", alg, "--mode", "scratch", "--name", "s") == 0
    assert vg("run", "call-analysis", alg, "--mode", "adaptive", "--batch", "1", "--name", "a") == 0
    runs = loaded / "ws" / "runs"
    d = rows(runs / "d" / "results.csv")
    assert d and d == rows(runs / "s" / "results.csv") == rows(runs / "a" / "results.csv")
    assert {r["view"] for r in d} == {"GV1", "GV2", "GV3", "GV4"}
    log = rows(runs / "s" / "runlog.csv")
    assert [r["decision"] for r in log] == ["scratch"] * 4
    report = json.loads((runs / "d" / "report.json").read_text())
    assert report["num_diffs"] == 260 and len(report["per_view_work"]) == 4


def test_run_errors(loaded, capsys):
    assert vg("create", loaded / "four.gvdl") == 0
    assert vg("run", "nothing", "wcc") == 2
    assert vg("run", "call-analysis", "bfs", "--source", "999") == 2
    assert vg("run", "call-analysis", "sssp", "--weight-prop", "city") == 2
    assert vg("run", "call-analysis", "mpsp") == 2


def test_single_view_and_aggregate(ws, capsys):
    assert vg("load", "Calls", CALLS_NODES, CALLS_EDGES) == 0
    (ws / "v.gvdl").write_text("create view Short on Calls edges where duration < 20\n"
                               "create view City-Calls-City on Calls\n"
                               "nodes group by city aggregate num-phones: count(*)\n"
                               "edges aggregate total-duration: sum(duration)\n")
    assert vg("create", ws / "v.gvdl") == 0
    out = capsys.readouterr().out
    assert "2 super-nodes" in out
    assert vg("run", "Short", "bfs") == 0
    assert vg("stats") == 0
    listing = capsys.readouterr().out
    assert "Short" in listing and "City-Calls-City" in listing


def test_gen_community_removal(ws, capsys):
    out = ws / "g"
    assert vg("gen", "community-removal", "--out", out, "--communities", 7, "--k", 4, "--size", 5) == 0
    assert "35 views" in capsys.readouterr().out
    assert vg("load", "G", out / "nodes.csv", out / "edges.csv") == 0
    assert vg("create", out / "collection.gvdl") == 0
    assert vg("run", "removal", "wcc", "--mode", "adaptive") == 0
