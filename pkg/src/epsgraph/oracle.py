"""Brute-force references used to verify every other component.

The oracle deliberately avoids the cover tree and communicator code paths:
it shares only the metric kernels (so float comparisons are apples to
apples) and the canonical graph container.
"""

from __future__ import annotations

import numpy as np

from .errors import GuardExceeded, InvalidInput
from .graph import NeighborGraph, assemble
from .metric import Metric, PointSet

BRUTE_GUARD = 50_000


def brute_graph(pts: PointSet, metric: Metric, eps: float,
                guard: int = BRUTE_GUARD) -> NeighborGraph:
    """Exact threshold graph by full pairwise scan (desk scale only)."""
    if eps < 0:
        raise InvalidInput("eps must be nonnegative")
    if pts.n > guard:
        raise GuardExceeded(f"brute_graph refuses n={pts.n} > {guard}")
    metric.check_points(pts)
    chunks = []
    ids = pts.ids_all()
    for i in range(pts.n - 1):
        tail = ids[i + 1:]
        d = metric.dists(pts, i, pts, tail)
        hit = d <= eps
        if hit.any():
            chunks.append((np.full(int(hit.sum()), i, dtype=np.int64),
                           tail[hit], d[hit]))
    return assemble(pts.n, chunks, eps, metric.kind)


def optimal_partition(sizes, nbins: int) -> int:
    """Minimal makespan of multiway number partitioning, by exhaustive search.

    Branch-and-bound over assignments with identical-load pruning; intended
    for instances with at most 12 items.
    """
    sizes = sorted((int(s) for s in sizes), reverse=True)
    if nbins < 1:
        raise InvalidInput("need at least one bin")
    if len(sizes) > 12:
        raise InvalidInput(f"exhaustive partition capped at 12 items, got {len(sizes)}")
    if not sizes:
        return 0
    loads = [0] * nbins
    # greedy first-fit-decreasing upper bound to seed the search
    for s in sizes:
        loads[loads.index(min(loads))] += s
    best = max(loads)
    loads = [0] * nbins

    def dfs(i: int, cur_max: int, best: int) -> int:
        if cur_max >= best:
            return best
        if i == len(sizes):
            return cur_max
        tried = set()
        for b in range(nbins):
            if loads[b] in tried:
                continue
            tried.add(loads[b])
            loads[b] += sizes[i]
            best = dfs(i + 1, max(cur_max, loads[b]), best)
            loads[b] -= sizes[i]
        return best

    return dfs(0, 0, best + 1)
