import numpy as np
import pytest

from epsgraph.errors import ConsistencyError, ParseError
from epsgraph.graph import (NeighborGraph, assemble, equals_canonical,
                            read_edge_list, stats, write_edge_list)
from epsgraph.io import gen_synthetic
from epsgraph.metric import make_metric
from epsgraph.oracle import brute_graph


def _chunk(*edges):
    u, v, d = zip(*edges)
    return (np.array(u, dtype=np.int64), np.array(v, dtype=np.int64),
            np.array(d, dtype=np.float64))


def test_assemble_orientation_dedup():
    g = assemble(5, [_chunk((2, 1, 0.5), (1, 2, 0.5))], 1.0, "euclidean")
    assert g.m == 1
    assert (g.u[0], g.v[0], g.dist[0]) == (1, 2, 0.5)


def test_assemble_empty_stream():
    g = assemble(4, [], 1.0, "euclidean")
    assert g.m == 0 and g.n == 4
    g2 = assemble(4, [_chunk((1, 1, 0.0))], 1.0, "euclidean")
    assert g2.m == 0  # self-loops dropped


def test_assemble_random_stream_matches_set_oracle(rng):
    edges = []
    for _ in range(500):
        u, v = rng.integers(0, 30, size=2)
        if u == v:
            continue
        d = round(abs(u - v) / 10, 3)
        edges.append((u, v, d))
        if rng.random() < 0.5:
            edges.append((v, u, d))
    g = assemble(30, [_chunk(*edges)], 10.0, "euclidean")
    want = sorted({(min(u, v), max(u, v)) for u, v, _ in edges})
    assert list(zip(g.u, g.v)) == want


def test_assemble_rejects_over_eps_and_inconsistent():
    with pytest.raises(ConsistencyError):
        assemble(3, [_chunk((0, 1, 2.0))], 1.0, "euclidean")
    with pytest.raises(ConsistencyError):
        assemble(3, [_chunk((0, 1, 0.5), (1, 0, 0.6))], 1.0, "euclidean")
    with pytest.raises(ConsistencyError):
        assemble(2, [_chunk((0, 5, 0.5))], 1.0, "euclidean")


def test_assemble_idempotent():
    g = assemble(6, [_chunk((3, 1, 0.2), (1, 3, 0.2), (0, 5, 0.9))],
                 1.0, "euclidean")
    g2 = assemble(6, [(g.u, g.v, g.dist)], 1.0, "euclidean")
    assert equals_canonical(g, g2) == (True, None)


def test_stats_examples():
    assert stats(NeighborGraph(10, 1.0, "euclidean")) == {
        "edges": 0, "avg_degree": 0.0}
    complete4 = assemble(
        4, [_chunk(*[(i, j, 0.1) for i in range(4) for j in range(i + 1, 4)])],
        1.0, "euclidean")
    assert stats(complete4) == {"edges": 6, "avg_degree": 3.0}


def test_stats_matches_degree_histogram(rng):
    pts = gen_synthetic("uniform-cube", 120, 3, seed=21)
    g = brute_graph(pts, make_metric("euclidean"), 0.3)
    deg = np.zeros(120, dtype=int)
    for u, v in zip(g.u, g.v):
        deg[u] += 1
        deg[v] += 1
    assert (g.degrees() == deg).all()
    assert stats(g)["avg_degree"] == pytest.approx(deg.mean())


def test_equals_canonical_reflexive_and_mutation():
    pts = gen_synthetic("uniform-cube", 60, 2, seed=22)
    g = brute_graph(pts, make_metric("euclidean"), 0.3)
    assert equals_canonical(g, g) == (True, None)

    rng = np.random.default_rng(23)
    for field in ("u", "v", "dist", "drop", "add"):
        u, v, d = g.u.copy(), g.v.copy(), g.dist.copy()
        if field == "u":
            u[4] = u[4] + 1 if u[4] + 1 != v[4] else u[4] + 2
        elif field == "v":
            v[4] += 61
        elif field == "dist":
            d[4] += 1e-9
        elif field == "drop":
            u, v, d = u[:-1], v[:-1], d[:-1]
        else:
            u = np.append(u, 0)
            v = np.append(v, 59)
            d = np.append(d, 0.123)
        mutated = NeighborGraph(g.n, g.eps, g.metric_kind, u, v, d)
        ok, why = equals_canonical(g, mutated)
        assert not ok and why


def test_edge_list_roundtrip(tmp_path):
    pts = gen_synthetic("uniform-cube", 80, 2, seed=24)
    g = brute_graph(pts, make_metric("euclidean"), 0.25)
    path = tmp_path / "g.txt"
    write_edge_list(g, str(path))
    back = read_edge_list(str(path))
    assert equals_canonical(g, back) == (True, None)
    assert back.eps == g.eps and back.metric_kind == g.metric_kind
    # byte determinism of the writer
    path2 = tmp_path / "g2.txt"
    write_edge_list(g, str(path2))
    assert path.read_bytes() == path2.read_bytes()


def test_edge_list_parse_errors(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("1 2\n")
    with pytest.raises(ParseError):
        read_edge_list(str(p))
    p.write_text("3 1 0.5 euclidean\n0 nope 0.1\n")
    with pytest.raises(ParseError):
        read_edge_list(str(p))
    p.write_text("3 1 0.5 euclidean\n0 1 0.1\n0 2 0.2\n")
    with pytest.raises(ParseError):
        read_edge_list(str(p))


def test_oracle_edge_count_monotone_in_eps():
    pts = gen_synthetic("uniform-cube", 150, 3, seed=25)
    counts = [brute_graph(pts, make_metric("euclidean"), e).m
              for e in (0.05, 0.1, 0.2, 0.4, 0.8)]
    assert counts == sorted(counts)
