import json

import pytest

from epsgraph.cli import main
from epsgraph.graph import read_edge_list, write_edge_list

DATASET = ["--dataset", "synth:uniform-cube", "--n", "200", "--dim", "3",
           "--metric", "euclidean", "--seed", "3"]


def _build(tmp_path, name="g.txt", extra=()):
    out = tmp_path / name
    rc = main(["build", *DATASET, "--epsilon", "0.3",
               "--algorithm", "landmark-ring", "--ranks", "3",
               "--out", str(out), *extra])
    assert rc == 0
    return out


def test_build_then_verify_pass(tmp_path, capsys):
    out = _build(tmp_path)
    rc = main(["verify", *DATASET, "--epsilon", "0.3", str(out)])
    assert rc == 0
    assert "PASS" in capsys.readouterr().out


def test_verify_detects_mutated_edge(tmp_path, capsys):
    out = _build(tmp_path)
    g = read_edge_list(str(out))
    g.dist[0] += 1e-9
    write_edge_list(g, str(out))
    rc = main(["verify", *DATASET, str(out)])
    assert rc == 4
    assert "differs" in capsys.readouterr().out


def test_verify_wrong_eps_header(tmp_path, capsys):
    out = _build(tmp_path)
    rc = main(["verify", *DATASET, "--epsilon", "0.4", str(out)])
    assert rc == 4
    assert "epsilon" in capsys.readouterr().out


def test_build_bad_algorithm_and_missing_eps(tmp_path):
    rc = main(["build", *DATASET, "--epsilon", "0.3", "--algorithm", "quux",
               "--out", str(tmp_path / "x.txt")])
    assert rc == 3
    rc = main(["build", *DATASET, "--algorithm", "systolic-ring",
               "--out", str(tmp_path / "x.txt")])
    assert rc == 3


def test_build_single_rank_and_stats_report(tmp_path):
    stats = tmp_path / "s.json"
    _build(tmp_path, extra=["--stats", str(stats)])
    rep = json.loads(stats.read_text())
    assert rep["edges"] > 0 and rep["dist_evals"] > 0
    assert len(rep["ranks_detail"]) == 3
    assert all("phase_seconds" in r for r in rep["ranks_detail"])


def test_build_trace(tmp_path):
    trace = tmp_path / "t.jsonl"
    _build(tmp_path, extra=["--trace", str(trace)])
    rows = [json.loads(ln) for ln in trace.read_text().splitlines()]
    assert rows and all({"round", "src", "dst", "bytes", "tag"} == set(r)
                        for r in rows)


def test_deterministic_rebuild_and_rank_independence(tmp_path):
    a = _build(tmp_path, "a.txt")
    b = _build(tmp_path, "b.txt")
    assert a.read_bytes() == b.read_bytes()
    out = tmp_path / "n1.txt"
    rc = main(["build", *DATASET, "--epsilon", "0.3",
               "--algorithm", "landmark-ring", "--ranks", "1",
               "--out", str(out)])
    assert rc == 0
    assert out.read_bytes() == a.read_bytes()


def test_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "dataset = synth:uniform-cube\nmetric = euclidean\n"
        "n = 200\ndim = 3\nseed = 3\nepsilon = 0.3\n"
        "algorithm = landmark-ring\nranks = 2\n")
    out = tmp_path / "c.txt"
    rc = main(["build", "--config", str(cfg), "--ranks", "3",
               "--out", str(out)])
    assert rc == 0
    assert out.read_bytes() == _build(tmp_path, "flag.txt").read_bytes()


def test_bench_single_cell_matches_build(tmp_path):
    out = _build(tmp_path)
    g = read_edge_list(str(out))
    bench_out = tmp_path / "bench.csv"
    rc = main(["bench", *DATASET, "--epsilon", "0.3",
               "--algorithm", "landmark-ring", "--ranks", "3",
               "--out", str(bench_out)])
    assert rc == 0
    header, row = bench_out.read_text().splitlines()[:2]
    cols = dict(zip(header.split(","), row.split(",")))
    assert int(cols["edges"]) == g.m
    assert float(cols["avg_degree"]) == pytest.approx(2 * g.m / g.n)
    assert int(cols["dist_evals"]) > 0


def test_bench_empty_matrix(tmp_path, capsys):
    rc = main(["bench", *DATASET, "--epsilon"])
    assert rc == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 1 and lines[0].startswith("dataset,")


def test_bench_json_format(tmp_path):
    out = tmp_path / "b.json"
    rc = main(["bench", *DATASET, "--epsilon", "0.3", "--algorithm",
               "systolic-ring", "--ranks", "1", "2", "--format", "json",
               "--out", str(out)])
    assert rc == 0
    rows = json.loads(out.read_text())
    assert len(rows) == 2
    assert rows[0]["edges"] == rows[1]["edges"]


def test_missing_dataset_file_exit_code(tmp_path):
    rc = main(["build", "--dataset", str(tmp_path / "nope.fvecs"),
               "--metric", "euclidean", "--epsilon", "0.1",
               "--out", str(tmp_path / "x.txt")])
    assert rc == 3
