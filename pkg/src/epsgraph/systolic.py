"""Point-partitioned threshold-graph construction over a ring pipeline.

Points are split into contiguous per-rank blocks; each rank builds a cover
tree over its block.  Blocks then circulate the ring: on round i, rank j
queries the visiting block (i+j) mod N against its local tree.  Round 0 is
the self-query; floor(N/2) shifted rounds follow.  Distance symmetry makes
further rounds redundant, and for even N the final round would pair ranks
both ways, so only the rank with the smaller index in each pair queries.
Edges are deduplicated in canonical graph assembly, which makes the output
independent of the rank count.
"""

from __future__ import annotations

import numpy as np

from .comm import Communicator
from .covertree import batch_query_flat, build_tree
from .errors import InvalidInput
from .graph import NeighborGraph, assemble
from .metric import Metric, PointSet


def partition_blocks(n: int, nranks: int):
    """Contiguous blocks of ceil(n/N) ids; the last blocks may be short/empty."""
    size = -(-n // nranks) if n else 0
    ids = np.arange(n, dtype=np.int64)
    return [ids[j * size:(j + 1) * size] for j in range(nranks)]


def _chunk_payload(pts: PointSet, ids: np.ndarray) -> dict:
    return {"ids": ids, "points": pts.raw_rows(ids)}


def run_systolic(pts: PointSet, metric: Metric, eps: float,
                 comm: Communicator, leaf_size: int = 10) -> NeighborGraph:
    """Threshold graph via the ring pipeline; equals the brute-force graph."""
    if eps < 0:
        raise InvalidInput("eps must be nonnegative")
    metric.check_points(pts)
    if pts.n == 0:
        raise InvalidInput("empty point set")
    n_ranks = comm.nranks
    blocks = partition_blocks(pts.n, n_ranks)

    trees = []
    for j, blk in enumerate(blocks):
        with comm.phase(j, "tree"):
            trees.append(build_tree(pts.subset(blk), metric, leaf_size,
                                    point_ids=blk) if len(blk) else None)

    edge_chunks = [[] for _ in range(n_ranks)]
    chunks = [_chunk_payload(pts, blk) for blk in blocks]
    rounds = n_ranks // 2 + 1
    for i in range(rounds):
        if i > 0:
            chunks = comm.ring_shift(chunks, tag=f"systolic-round-{i}")
        for j in range(n_ranks):
            if n_ranks % 2 == 0 and i == n_ranks // 2:
                partner = (j + n_ranks // 2) % n_ranks
                if j > partner:
                    continue  # the partner rank covers this block pair
            visiting = chunks[j]["ids"]
            if trees[j] is None or len(visiting) == 0:
                continue
            with comm.phase(j, "query"):
                q, hit, d = batch_query_flat(trees[j], pts, metric, eps=eps,
                                             query_idx=visiting)
            comm.add_counter(j, "query_pairings")
            keep = q != hit
            edge_chunks[j].append((q[keep], hit[keep], d[keep]))

    flat = [c for rank_chunks in edge_chunks for c in rank_chunks]
    return assemble(pts.n, flat, eps, metric.kind)
