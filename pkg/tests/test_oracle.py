import itertools

import numpy as np
import pytest

from epsgraph.errors import GuardExceeded, InvalidInput
from epsgraph.metric import PointSet, make_metric
from epsgraph.oracle import brute_graph, optimal_partition


def test_brute_two_points():
    pts = PointSet.from_vectors([[0.0], [1.0]])
    g = brute_graph(pts, make_metric("euclidean"), 1.0)
    assert g.m == 1 and (g.u[0], g.v[0], g.dist[0]) == (0, 1, 1.0)


def test_brute_below_min_distance_is_empty():
    pts = PointSet.from_vectors([[0.0], [1.0], [5.0]])
    assert brute_graph(pts, make_metric("euclidean"), 0.5).m == 0


def test_brute_grid_neighbor_counts():
    # spacing-1 line: eps=1.5 catches adjacent pairs only; the
    # path-plus-second-neighbor graph (99 + 98 edges) needs eps in [2, 3)
    pts = PointSet.from_vectors(np.arange(100.0).reshape(-1, 1))
    assert brute_graph(pts, make_metric("euclidean"), 1.5).m == 99
    assert brute_graph(pts, make_metric("euclidean"), 2.0).m == 99 + 98


def test_brute_guard():
    pts = PointSet.from_vectors(np.zeros((11, 1)))
    with pytest.raises(GuardExceeded):
        brute_graph(pts, make_metric("euclidean"), 1.0, guard=10)
    with pytest.raises(InvalidInput):
        brute_graph(pts, make_metric("euclidean"), -1.0)


def _enumerated_optimum(sizes, nbins):
    best = sum(sizes)
    for assign in itertools.product(range(nbins), repeat=len(sizes)):
        loads = [0] * nbins
        for s, b in zip(sizes, assign):
            loads[b] += s
        best = min(best, max(loads))
    return best


def test_optimal_partition_examples():
    assert optimal_partition([5, 3, 2], 1) == 10
    assert optimal_partition([8, 7, 6, 5, 4], 2) == 15
    assert optimal_partition([9, 4, 2], 5) == 9  # m <= N: max size
    assert optimal_partition([], 3) == 0


def test_optimal_partition_matches_full_enumeration(rng):
    for _ in range(30):
        m = int(rng.integers(1, 8))
        nbins = int(rng.integers(1, 4))
        sizes = rng.integers(1, 30, size=m).tolist()
        assert optimal_partition(sizes, nbins) == _enumerated_optimum(sizes, nbins)


def test_optimal_partition_guard():
    with pytest.raises(InvalidInput):
        optimal_partition(list(range(13)), 2)
    with pytest.raises(InvalidInput):
        optimal_partition([1], 0)
