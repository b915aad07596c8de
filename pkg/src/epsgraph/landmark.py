"""Landmark (Voronoi) threshold-graph construction.

Pipeline: select m centers, build a distributed Voronoi diagram over the
per-rank point blocks, balance whole cells across ranks (LPT multiway
number partitioning), coalesce each cell onto its owner with an all-to-all,
and query each cell against its own cover tree for intra-cell edges.
Cross-cell edges come from *ghost points*: p outside cell i can have a
neighbor inside it only if d(p, c_i) <= d(p, C) + 2*eps, so candidate cells
per point are found by querying the center set with exactly that radius.
Two ghost regimes are provided: shipping ghosts to cell owners with an
all-to-all (collective), or circulating point blocks around the ring and
testing them against each rank's locally-owned centers (ring).

Both regimes produce the same canonical graph as the systolic pipeline and
the brute-force scan; pairs discovered from both endpoints deduplicate in
assembly.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

import numpy as np

from .comm import Communicator
from .covertree import batch_query_flat, build_tree
from .errors import InvalidInput
from .graph import NeighborGraph, assemble
from .metric import Metric, PointSet
from .systolic import partition_blocks


@dataclass
class VoronoiDiagram:
    """Nearest-center assignment of every point (ties to the smaller index).

    ``sections[j][i]`` lists the ids of cell i's members inside rank j's
    block, so cells are stored distributed exactly as built.
    """

    centers: np.ndarray        # center point ids, ascending
    cell_of: np.ndarray        # per point: index into centers
    dist_to_center: np.ndarray  # per point: d(p, C)
    cell_radii: np.ndarray     # per cell: max member distance
    sections: list

    @property
    def m(self) -> int:
        return len(self.centers)

    def cell_sizes(self) -> np.ndarray:
        return np.bincount(self.cell_of, minlength=self.m)


@dataclass
class CellAssignment:
    """Cell-to-rank map plus the resulting per-rank point loads."""

    cell_to_rank: np.ndarray
    loads: np.ndarray

    @property
    def makespan(self) -> int:
        return int(self.loads.max()) if len(self.loads) else 0


def select_centers(pts: PointSet, metric: Metric, m: int,
                   strategy: str = "random", seed: int = 0) -> np.ndarray:
    """Choose m distinct center points; returns ascending point ids.

    ``random`` samples distinct values with a seeded generator; ``greedy``
    is the farthest-point prefix starting from point 0, whose selection is
    simultaneously well-separated and covering (an r-net prefix).
    """
    metric.check_points(pts)
    if pts.n == 0:
        raise InvalidInput("empty point set")
    reps = pts.distinct_reps()
    if not 1 <= m <= len(reps):
        raise InvalidInput(f"m={m} not in 1..{len(reps)} (distinct points)")
    if strategy == "random":
        picks = random.Random(seed).sample([int(i) for i in reps], m)
        return np.asarray(sorted(picks), dtype=np.int64)
    if strategy == "greedy":
        chosen = [0]
        mind = metric.dists(pts, 0, pts)
        for _ in range(m - 1):
            nxt = int(np.argmax(mind))  # first max = smallest id
            chosen.append(nxt)
            np.minimum(mind, metric.dists(pts, nxt, pts), out=mind)
        return np.asarray(sorted(chosen), dtype=np.int64)
    raise InvalidInput(f"unknown center strategy {strategy!r}")


def build_voronoi(pts: PointSet, centers: np.ndarray, metric: Metric,
                  comm: Communicator) -> VoronoiDiagram:
    """Distributed nearest-center assignment with a global radius reduce."""
    centers = np.asarray(centers, dtype=np.int64)
    m = len(centers)
    blocks = partition_blocks(pts.n, comm.nranks)
    cell_of = np.empty(pts.n, dtype=np.int64)
    dist_to_center = np.empty(pts.n, dtype=np.float64)
    partial_radii = []
    sections = []
    for j, blk in enumerate(blocks):
        with comm.phase(j, "partition"):
            radii_j = np.zeros(m, dtype=np.float64)
            if len(blk):
                best_d = np.full(len(blk), np.inf)
                best_c = np.zeros(len(blk), dtype=np.int64)
                for ci in range(m):
                    d = metric.dists(pts, int(centers[ci]), pts, blk)
                    closer = d < best_d  # strict keeps the smaller index on ties
                    best_d[closer] = d[closer]
                    best_c[closer] = ci
                cell_of[blk] = best_c
                dist_to_center[blk] = best_d
                np.maximum.at(radii_j, best_c, best_d)
            partial_radii.append(radii_j)
            sections.append([blk[best_c == ci] if len(blk) else blk
                             for ci in range(m)])
    gathered = comm.allgather(partial_radii, tag="voronoi-radii")
    cell_radii = np.max(np.stack(gathered), axis=0) if m else np.zeros(0)
    return VoronoiDiagram(centers, cell_of, dist_to_center, cell_radii, sections)


def assign_cells(cell_sizes, nranks: int) -> CellAssignment:
    """Longest-Processing-Time greedy: biggest cells first to the lightest rank.

    Ties: equal sizes order by cell index; equal loads go to the smaller
    rank.  4/3-approximate makespan.
    """
    sizes = np.asarray(cell_sizes, dtype=np.int64)
    if nranks < 1:
        raise InvalidInput("need at least one rank")
    order = np.lexsort((np.arange(len(sizes)), -sizes))
    f = np.empty(len(sizes), dtype=np.int64)
    loads = np.zeros(nranks, dtype=np.int64)
    import heapq

    heap = [(0, r) for r in range(nranks)]
    for ci in order:
        load, r = heapq.heappop(heap)
        f[ci] = r
        heapq.heappush(heap, (load + int(sizes[ci]), r))
    for ci, r in enumerate(f):
        loads[r] += sizes[ci]
    return CellAssignment(f, loads)


def cyclic_assignment(cell_sizes, nranks: int,
                      by_size: bool = False) -> CellAssignment:
    """Baseline round-robin cell placement.

    ``by_size=False`` deals cells in index order (size-blind).
    ``by_size=True`` deals them in descending size order; LPT always matches
    or beats that variant, whereas an index-order deal can get lucky on rare
    instances.
    """
    sizes = np.asarray(cell_sizes, dtype=np.int64)
    if nranks < 1:
        raise InvalidInput("need at least one rank")
    f = np.empty(len(sizes), dtype=np.int64)
    order = (np.lexsort((np.arange(len(sizes)), -sizes))
             if by_size else np.arange(len(sizes)))
    f[order] = np.arange(len(sizes), dtype=np.int64) % nranks
    loads = np.zeros(nranks, dtype=np.int64)
    np.add.at(loads, f, sizes)
    return CellAssignment(f, loads)


def coalesce_and_query(pts: PointSet, vd: VoronoiDiagram,
                       assign: CellAssignment, metric: Metric, eps: float,
                       comm: Communicator, leaf_size: int = 10):
    """Exchange cell sections, build per-cell trees, find intra-cell edges.

    Returns (edge chunk list, per-rank dict cell -> (tree, member ids)).
    Trees are retained for the ghost phase.
    """
    n_ranks = comm.nranks
    send = [[[] for _ in range(n_ranks)] for _ in range(n_ranks)]
    for j in range(n_ranks):
        for ci in range(vd.m):
            ids = vd.sections[j][ci]
            if len(ids):
                send[j][int(assign.cell_to_rank[ci])].append(
                    {"cell": ci, "ids": ids, "points": pts.raw_rows(ids)})
    recv = comm.alltoallv(send, tag="coalesce-cells")

    edge_chunks = []
    cell_trees = [dict() for _ in range(n_ranks)]
    for k in range(n_ranks):
        mine = sorted({e["cell"] for row in recv[k] for e in row})
        with comm.phase(k, "tree"):
            for ci in mine:
                ids = np.concatenate(
                    [e["ids"] for row in recv[k] for e in row if e["cell"] == ci])
                sub = pts.subset(ids)
                tree = build_tree(sub, metric, leaf_size, point_ids=ids)
                cell_trees[k][ci] = (tree, ids)
                q, hit, d = batch_query_flat(tree, sub, metric, eps=eps)
                qg = ids[q]
                keep = qg != hit
                edge_chunks.append((qg[keep], hit[keep], d[keep]))
    return edge_chunks, cell_trees


def ghost_sets(pts: PointSet, vd: VoronoiDiagram, metric: Metric, eps: float):
    """Reference O(n*m) ghost sets: per cell i, the points outside it with
    d(p, c_i) <= d(p, C) + 2*eps.  Returns a list of ascending id arrays."""
    out = []
    ids = pts.ids_all()
    for ci in range(vd.m):
        d = metric.dists(pts, int(vd.centers[ci]), pts)
        mask = (d <= vd.dist_to_center + 2.0 * eps) & (vd.cell_of != ci)
        out.append(ids[mask])
    return out


def collective_ghost_queries(pts: PointSet, vd: VoronoiDiagram,
                             assign: CellAssignment, cell_trees,
                             metric: Metric, eps: float,
                             comm: Communicator,
                             leaf_size: int = 10):
    """Ghost phase via one all-to-all of (point, target cell) pairs.

    Every rank queries its original block against a tree over the shared
    center set with radius d(p,C) + 2*eps, ships each point to the owners
    of its candidate cells, and owners query the ghosts against the cell
    trees with radius eps.
    """
    n_ranks = comm.nranks
    blocks = partition_blocks(pts.n, comm.nranks)
    cpts = pts.subset(vd.centers)
    rep_tree = build_tree(cpts, metric, leaf_size, point_ids=vd.centers)

    send = [[[] for _ in range(n_ranks)] for _ in range(n_ranks)]
    for j, blk in enumerate(blocks):
        if len(blk) == 0:
            continue
        with comm.phase(j, "ghost"):
            radii = vd.dist_to_center[blk] + 2.0 * eps
            q, hit_center, _ = batch_query_flat(rep_tree, pts, metric,
                                                radii=radii, query_idx=blk)
            hit_cell = np.searchsorted(vd.centers, hit_center)
            keep = hit_cell != vd.cell_of[q]
            q, hit_cell = q[keep], hit_cell[keep]
            order = np.lexsort((hit_cell, q))
            q, hit_cell = q[order], hit_cell[order]
            for k in range(n_ranks):
                sel = assign.cell_to_rank[hit_cell] == k
                if sel.any():
                    send[j][k].append({"ids": q[sel], "cells": hit_cell[sel],
                                       "points": pts.raw_rows(q[sel])})
    recv = comm.alltoallv(send, tag="ghost-points")

    edge_chunks = []
    for k in range(n_ranks):
        if not cell_trees[k]:
            continue
        with comm.phase(k, "ghost"):
            entries = [e for row in recv[k] for e in row]
            for ci in sorted(cell_trees[k]):
                parts = [e["ids"][e["cells"] == ci] for e in entries]
                parts = [p for p in parts if len(p)]
                if not parts:
                    continue
                ghosts = np.concatenate(parts)
                tree, _ids = cell_trees[k][ci]
                comm.add_counter(k, "ghost_cell_queries")
                gq, hit, d = batch_query_flat(tree, pts, metric, eps=eps,
                                              query_idx=ghosts)
                edge_chunks.append((gq, hit, d))
    return edge_chunks


def ring_ghost_queries(pts: PointSet, vd: VoronoiDiagram,
                       assign: CellAssignment, cell_trees,
                       metric: Metric, eps: float,
                       comm: Communicator,
                       leaf_size: int = 10):
    """Ghost phase via the ring: blocks visit every rank, which tests them
    against a tree over its locally-owned centers and queries matches
    directly.  Avoids the all-to-all at the cost of N circulation rounds.
    """
    n_ranks = comm.nranks
    blocks = partition_blocks(pts.n, comm.nranks)
    local_cells = [np.flatnonzero(assign.cell_to_rank == j) for j in range(n_ranks)]
    local_trees = []
    for j in range(n_ranks):
        with comm.phase(j, "ghost"):
            if len(local_cells[j]):
                cj = vd.centers[local_cells[j]]
                local_trees.append(build_tree(pts.subset(cj), metric,
                                              leaf_size, point_ids=cj))
            else:
                local_trees.append(None)

    chunks = [{"ids": blk, "dc": vd.dist_to_center[blk],
               "cell": vd.cell_of[blk], "points": pts.raw_rows(blk)}
              for blk in blocks]
    edge_chunks = []
    for i in range(n_ranks):
        if i > 0:
            chunks = comm.ring_shift(chunks, tag=f"ghost-round-{i}")
        for j in range(n_ranks):
            visiting = chunks[j]
            if local_trees[j] is None or len(visiting["ids"]) == 0:
                continue
            with comm.phase(j, "ghost"):
                radii = visiting["dc"] + 2.0 * eps
                q, hit_center, _ = batch_query_flat(
                    local_trees[j], pts, metric, radii=radii,
                    query_idx=visiting["ids"])
                hit_cell = np.searchsorted(vd.centers, hit_center)
                own = vd.cell_of[q]
                keep = hit_cell != own
                q, hit_cell = q[keep], hit_cell[keep]
                for ci in np.unique(hit_cell):
                    ci = int(ci)
                    if ci not in cell_trees[j]:
                        continue  # candidate cell has no members anywhere
                    sel = hit_cell == ci
                    ghosts = np.sort(q[sel])
                    tree, _ids = cell_trees[j][ci]
                    comm.add_counter(j, "ghost_cell_queries")
                    gq, hit, d = batch_query_flat(tree, pts, metric, eps=eps,
                                                  query_idx=ghosts)
                    edge_chunks.append((gq, hit, d))
    return edge_chunks


def run_landmark(pts: PointSet, metric: Metric, eps: float,
                 comm: Communicator, cells: int | None = None,
                 leaf_size: int = 10, strategy: str = "random",
                 seed: int = 0, ghost: str = "collective") -> NeighborGraph:
    """Full landmark pipeline; equals the brute-force graph.

    ``cells`` defaults to 8 ranks-worth of cells, capped by the number of
    distinct points.  ``ghost`` picks the cross-cell regime: "collective"
    or "ring".
    """
    if eps < 0:
        raise InvalidInput("eps must be nonnegative")
    metric.check_points(pts)
    if pts.n == 0:
        raise InvalidInput("empty point set")
    if ghost not in ("collective", "ring"):
        raise InvalidInput(f"unknown ghost mode {ghost!r}")
    if cells is None:
        cells = min(8 * comm.nranks, len(pts.distinct_reps()))

    centers = select_centers(pts, metric, cells, strategy, seed)
    items = [centers if j == 0 else np.empty(0, dtype=np.int64)
             for j in range(comm.nranks)]
    gathered = comm.allgather(items, tag="centers")
    centers = np.concatenate(gathered)

    vd = build_voronoi(pts, centers, metric, comm)
    assign = assign_cells(vd.cell_sizes(), comm.nranks)
    intra, cell_trees = coalesce_and_query(pts, vd, assign, metric, eps,
                                           comm, leaf_size)
    if ghost == "collective":
        cross = collective_ghost_queries(pts, vd, assign, cell_trees, metric,
                                         eps, comm, leaf_size)
    else:
        cross = ring_ghost_queries(pts, vd, assign, cell_trees, metric, eps,
                                   comm, leaf_size)
    return assemble(pts.n, intra + cross, eps, metric.kind)
