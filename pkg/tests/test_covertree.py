import numpy as np
import pytest

from conftest import dataset_for
from epsgraph.covertree import (VertexTriple, batch_query_flat,
                                batch_range_query, build_tree,
                                check_invariants, dump_text, range_query,
                                split_vertex)
from epsgraph.errors import InvalidInput
from epsgraph.io import gen_synthetic
from epsgraph.metric import PointSet, make_metric

TRUE_METRICS = ("euclidean", "hamming", "edit")


def _triple(pts, metric, members=None):
    members = pts.ids_all() if members is None else np.asarray(members, np.int64)
    d = metric.dists(pts, int(members[0]), pts, members)
    k = int(np.argmax(d))
    return VertexTriple(members=members, root=int(members[0]),
                        radius=float(d[k]), level=0, dists=d,
                        farthest=int(members[k]))


def _ball_scan(pts, metric, qpts, qi, eps):
    """Independent O(n) range oracle."""
    d = metric.dists(qpts, qi, pts)
    ids = np.flatnonzero(d <= eps)
    return ids, d[ids]


def test_split_two_points():
    pts = PointSet.from_vectors([[0.0], [3.0]])
    kids = split_vertex(_triple(pts, make_metric("euclidean")), pts,
                        make_metric("euclidean"))
    assert [k.members.tolist() for k in kids] == [[0], [1]]
    assert [k.root for k in kids] == [0, 1]
    assert [k.radius for k in kids] == [0.0, 0.0]


def test_split_collinear_trace():
    # hand trace: r=10, candidate 4 has min-dist 4 <= 5, so m=2
    pts = PointSet.from_vectors([[0.0], [10.0], [4.0]])
    kids = split_vertex(_triple(pts, make_metric("euclidean")), pts,
                        make_metric("euclidean"))
    assert len(kids) == 2
    assert kids[0].root == 0 and kids[0].members.tolist() == [0, 2]
    assert kids[0].radius == 4.0 and kids[0].farthest == 2
    assert kids[1].root == 1 and kids[1].members.tolist() == [1]


def test_split_postconditions_random():
    pts = gen_synthetic("uniform-cube", 200, 2, seed=31)
    metric = make_metric("euclidean")
    tr = _triple(pts, metric)
    kids = split_vertex(tr, pts, metric)
    assert len(kids) >= 2
    half = tr.radius / 2.0
    oracle = make_metric("euclidean")
    seen = np.concatenate([k.members for k in kids])
    assert sorted(seen.tolist()) == list(range(200))
    roots = [k.root for k in kids]
    for a in range(len(roots)):
        for b in range(a + 1, len(roots)):
            assert oracle.distance(pts.data[roots[a]], pts.data[roots[b]]) > half
    for k in kids:
        d = oracle.dists(pts, k.root, pts, k.members)
        assert (d <= half).all()          # covering at r/2
        assert (d == k.dists).all()       # cached distances correct
        assert k.radius == d.max()
        assert k.farthest == k.members[int(np.argmax(d))]


def test_split_rejects_zero_radius():
    pts = PointSet.from_vectors([[1.0], [1.0]])
    with pytest.raises(InvalidInput):
        split_vertex(_triple(pts, make_metric("euclidean")), pts,
                     make_metric("euclidean"))


def test_build_single_point():
    pts = PointSet.from_vectors([[7.0, 7.0]])
    tree = build_tree(pts, make_metric("euclidean"))
    assert tree.n_vertices == 1 and tree.is_leaf(tree.root)
    assert tree.leaf_group[0].tolist() == [0]


def test_build_all_identical_points():
    pts = PointSet.from_vectors(np.full((9, 2), 3.5))
    tree = build_tree(pts, make_metric("euclidean"))
    assert tree.n_vertices == 2
    assert not tree.is_leaf(tree.root)
    assert tree.leaf_group[1].tolist() == list(range(9))
    assert not check_invariants(tree, make_metric("euclidean"))


def test_build_empty_or_bad_leaf_size():
    with pytest.raises(InvalidInput):
        build_tree(PointSet.from_vectors(np.empty((0, 2))),
                   make_metric("euclidean"))
    with pytest.raises(InvalidInput):
        build_tree(PointSet.from_vectors([[1.0]]), make_metric("euclidean"),
                   leaf_size=0)


@pytest.mark.parametrize("leaf_size", [1, 10])
def test_build_invariants_and_dedup_500(leaf_size):
    base = gen_synthetic("uniform-cube", 450, 3, seed=32)
    dup = np.vstack([base.data, base.data[:50]])  # 50 injected duplicates
    pts = PointSet.from_vectors(dup)
    metric = make_metric("euclidean")
    tree = build_tree(pts, metric, leaf_size)
    assert check_invariants(tree, make_metric("euclidean")) == []
    leaf_keys = {pts.value_key(int(tree.point[v]))
                 for v in range(tree.n_vertices) if tree.is_leaf(v)}
    assert leaf_keys == {pts.value_key(i) for i in range(pts.n)}


@pytest.mark.parametrize("kind", TRUE_METRICS + ("cosine",))
def test_build_invariants_all_metrics(kind):
    pts = dataset_for(kind, 250, seed=33)
    tree = build_tree(pts, make_metric(kind), 5)
    assert check_invariants(tree, make_metric(kind)) == []


def test_checker_detects_corruption():
    pts = gen_synthetic("uniform-cube", 60, 2, seed=34)
    tree = build_tree(pts, make_metric("euclidean"), 4)
    tree.radius[0] = tree.radius[0] / 3.0
    assert check_invariants(tree, make_metric("euclidean"))


def test_range_query_eps_covers_everything():
    pts = gen_synthetic("uniform-cube", 80, 2, seed=35)
    metric = make_metric("euclidean")
    tree = build_tree(pts, metric, 5)
    ids, _ = range_query(tree, pts, 0, 10.0, metric)
    assert ids.tolist() == list(range(80))


def test_range_query_zero_eps_duplicate_group():
    pts = PointSet.from_vectors([[0.0], [4.0], [0.0], [9.0], [0.0]])
    metric = make_metric("euclidean")
    tree = build_tree(pts, metric, 2)
    ids, ds = range_query(tree, pts, 2, 0.0, metric)
    assert ids.tolist() == [0, 2, 4]
    assert (ds == 0.0).all()


@pytest.mark.parametrize("kind", TRUE_METRICS)
def test_query_exactness_against_ball_scan(kind):
    pts = dataset_for(kind, 500, seed=36)
    metric = make_metric(kind)
    tree = build_tree(pts, metric, 8)
    queries = dataset_for(kind, 40, seed=37)
    sample = make_metric(kind).dists_pairs(
        pts, np.arange(200), pts, np.arange(200, 400))
    for eps_q in (0.1, 0.5, 0.9):
        eps = float(np.quantile(sample, eps_q))
        for qi in range(queries.n):
            ids, ds = range_query(tree, queries, qi, eps, metric)
            want_ids, want_ds = _ball_scan(pts, make_metric(kind),
                                           queries, qi, eps)
            assert ids.tolist() == want_ids.tolist()
            assert (ds == want_ds).all()


def test_batch_matches_single_queries():
    pts = gen_synthetic("uniform-cube", 400, 4, seed=38)
    metric = make_metric("euclidean")
    tree = build_tree(pts, metric, 10)
    queries = gen_synthetic("uniform-cube", 100, 4, seed=39)
    eps = 0.3
    batched = batch_range_query(tree, queries, eps, metric)
    assert len(batched) == 100
    for qi, (ids, ds) in enumerate(batched):
        want_ids, want_ds = range_query(tree, queries, qi, eps, metric)
        assert ids.tolist() == want_ids.tolist()
        assert (ds == want_ds).all()


def test_batch_empty_and_singleton():
    pts = gen_synthetic("uniform-cube", 50, 2, seed=40)
    metric = make_metric("euclidean")
    tree = build_tree(pts, metric, 5)
    assert batch_range_query(tree, pts, 0.2, metric,
                             query_idx=np.empty(0, np.int64)) == []
    one = batch_range_query(tree, pts, 0.2, metric, query_idx=[7])
    ids, ds = range_query(tree, pts, 7, 0.2, metric)
    assert one[0][0].tolist() == ids.tolist()


def test_batch_per_query_radii():
    pts = gen_synthetic("uniform-cube", 300, 3, seed=41)
    metric = make_metric("euclidean")
    tree = build_tree(pts, metric, 10)
    radii = np.linspace(0.05, 0.5, 20)
    qidx = np.arange(20, dtype=np.int64)
    q, hit, d = batch_query_flat(tree, pts, metric, radii=radii, query_idx=qidx)
    for t, qi in enumerate(qidx):
        got = np.sort(hit[q == qi])
        want, _ = _ball_scan(pts, make_metric("euclidean"), pts, int(qi),
                             float(radii[t]))
        assert got.tolist() == want.tolist()


def test_query_monotone_in_eps():
    pts = gen_synthetic("uniform-cube", 200, 3, seed=42)
    metric = make_metric("euclidean")
    tree = build_tree(pts, metric, 10)
    for qi in (0, 11, 99):
        prev: set = set()
        for eps in (0.05, 0.15, 0.3, 0.6):
            ids, _ = range_query(tree, pts, qi, eps, metric)
            cur = set(ids.tolist())
            assert prev <= cur
            prev = cur


def test_query_rejects_negative_eps():
    pts = gen_synthetic("uniform-cube", 10, 2, seed=43)
    metric = make_metric("euclidean")
    tree = build_tree(pts, metric)
    with pytest.raises(InvalidInput):
        range_query(tree, pts, 0, -0.1, metric)
    with pytest.raises(InvalidInput):
        batch_query_flat(tree, pts, metric, eps=-1.0)


def test_cosine_queries_never_false_positive():
    # cosine is not a true metric: pruning may miss, but must never invent
    pts = gen_synthetic("uniform-cube", 300, 5, seed=44)
    metric = make_metric("cosine")
    tree = build_tree(pts, metric, 10)
    for qi in range(15):
        ids, ds = range_query(tree, pts, qi, 0.02, metric)
        want_ids, _ = _ball_scan(pts, make_metric("cosine"), pts, qi, 0.02)
        assert set(ids.tolist()) <= set(want_ids.tolist())
        assert (ds <= 0.02).all()


def test_subset_tree_reports_global_ids():
    pts = gen_synthetic("uniform-cube", 100, 2, seed=45)
    keep = np.arange(30, 60, dtype=np.int64)
    metric = make_metric("euclidean")
    tree = build_tree(pts.subset(keep), metric, 5, point_ids=keep)
    q, hit, d = batch_query_flat(tree, pts, metric, eps=0.2,
                                 query_idx=np.array([0, 95]))
    assert set(hit.tolist()) <= set(keep.tolist())
    for qi in (0, 95):
        want, _ = _ball_scan(pts.subset(keep), make_metric("euclidean"),
                             pts, qi, 0.2)
        assert sorted(hit[q == qi].tolist()) == keep[want].tolist()


GOLDEN_DUMP = """\
epsgraph-covertree v1
n=5 vertices=8 leaf_size=2 metric=euclidean
v 0 point=0 level=0 radius=10.0 parent=-1 split_radius=10.0 leaf=[-] children=[1,2]
v 1 point=0 level=1 radius=4.0 parent=0 split_radius=4.0 leaf=[-] children=[3,4]
v 2 point=1 level=1 radius=1.0 parent=0 split_radius=- leaf=[-] children=[5,6]
v 3 point=0 level=2 radius=0.0 parent=1 split_radius=- leaf=[0] children=[-]
v 4 point=2 level=2 radius=0.0 parent=1 split_radius=- leaf=[-] children=[7]
v 5 point=1 level=2 radius=0.0 parent=2 split_radius=- leaf=[1] children=[-]
v 6 point=4 level=2 radius=0.0 parent=2 split_radius=- leaf=[4] children=[-]
v 7 point=2 level=3 radius=0.0 parent=4 split_radius=- leaf=[2,3] children=[-]
"""


def test_dump_golden():
    pts = PointSet.from_vectors([[0.0], [10.0], [4.0], [4.0], [9.0]])
    tree = build_tree(pts, make_metric("euclidean"), leaf_size=2)
    assert dump_text(tree) == GOLDEN_DUMP


@pytest.mark.slow
def test_distance_evaluation_economy_desk_scale():
    # harness constant: build + all-pairs batch query within 30% of n^2
    n = 20_000
    pts = gen_synthetic("gaussian-mixture", n, 8, clusters=10, seed=46,
                        scale=0.02)
    eps = 2.0 * pts.meta["cluster_scale"]
    metric = make_metric("euclidean")
    tree = build_tree(pts, metric, 10)
    batch_query_flat(tree, pts, metric, eps=eps)
    assert metric.eval_count <= 0.30 * n * n
