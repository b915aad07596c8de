"""Edge accumulation, canonicalization, statistics, comparison, and file I/O.

A :class:`NeighborGraph` is the canonical form of a threshold graph: unique
undirected edges (u < v) in lexicographic order with exact float64 distances.
All construction pipelines funnel their raw edge streams through
:func:`assemble`, so two runs agree iff their canonical forms are equal.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConsistencyError, ParseError

_EMPTY_I = np.empty(0, dtype=np.int64)
_EMPTY_F = np.empty(0, dtype=np.float64)


@dataclass(frozen=True)
class NeighborGraph:
    n: int
    eps: float
    metric_kind: str
    u: np.ndarray = field(default_factory=lambda: _EMPTY_I)
    v: np.ndarray = field(default_factory=lambda: _EMPTY_I)
    dist: np.ndarray = field(default_factory=lambda: _EMPTY_F)

    @property
    def m(self) -> int:
        return len(self.u)

    def degrees(self) -> np.ndarray:
        deg = np.bincount(self.u, minlength=self.n)
        deg += np.bincount(self.v, minlength=self.n)
        return deg


def assemble(n: int, chunks, eps: float, metric_kind: str) -> NeighborGraph:
    """Canonicalize a raw edge stream into a NeighborGraph.

    ``chunks`` is an iterable of (u, v, dist) array triples, possibly with
    both orientations and repeats.  Self-loops are dropped; a repeated pair
    must carry the identical distance and an edge with distance > eps is an
    internal-consistency error (the pipelines only emit verified edges).
    """
    eps = float(eps)
    us, vs, ds = [], [], []
    for cu, cv, cd in chunks:
        us.append(np.asarray(cu, dtype=np.int64))
        vs.append(np.asarray(cv, dtype=np.int64))
        ds.append(np.asarray(cd, dtype=np.float64))
    if not us or sum(len(x) for x in us) == 0:
        return NeighborGraph(n, eps, metric_kind)
    u = np.concatenate(us)
    v = np.concatenate(vs)
    d = np.concatenate(ds)
    lo = np.minimum(u, v)
    hi = np.maximum(u, v)
    keep = lo != hi
    lo, hi, d = lo[keep], hi[keep], d[keep]
    if len(lo) == 0:
        return NeighborGraph(n, eps, metric_kind)
    if lo.min() < 0 or hi.max() >= n:
        raise ConsistencyError("edge endpoint outside 0..n-1")
    if d.max() > eps:
        raise ConsistencyError(
            f"edge with distance {d.max()!r} exceeds eps {eps!r}")
    order = np.lexsort((d, hi, lo))
    lo, hi, d = lo[order], hi[order], d[order]
    same = (lo[1:] == lo[:-1]) & (hi[1:] == hi[:-1])
    if (same & (d[1:] != d[:-1])).any():
        raise ConsistencyError("repeated edge with inconsistent distance")
    first = np.concatenate(([True], ~same))
    return NeighborGraph(n, eps, metric_kind, lo[first], hi[first], d[first])


def stats(g: NeighborGraph) -> dict:
    """Edge count and average degree (2|E|/n)."""
    avg = 2.0 * g.m / g.n if g.n else 0.0
    return {"edges": g.m, "avg_degree": avg}


def equals_canonical(g1: NeighborGraph, g2: NeighborGraph):
    """(equal, first-divergence message or None)."""
    if g1.n != g2.n:
        return False, f"vertex counts differ: {g1.n} vs {g2.n}"
    k = min(g1.m, g2.m)
    neq = (g1.u[:k] != g2.u[:k]) | (g1.v[:k] != g2.v[:k]) | (g1.dist[:k] != g2.dist[:k])
    bad = np.flatnonzero(neq)
    if len(bad):
        i = int(bad[0])
        return False, (
            f"edge {i} differs: "
            f"({g1.u[i]}, {g1.v[i]}, {g1.dist[i]!r}) vs "
            f"({g2.u[i]}, {g2.v[i]}, {g2.dist[i]!r})")
    if g1.m != g2.m:
        longer, at = (g1, g2.m) if g1.m > g2.m else (g2, g1.m)
        return False, (
            f"edge counts differ: {g1.m} vs {g2.m}; first extra edge "
            f"({longer.u[at]}, {longer.v[at]}, {longer.dist[at]!r})")
    return True, None


def write_edge_list(g: NeighborGraph, path: str) -> None:
    """Text edge list: header ``n m epsilon metric`` then ``u v dist`` lines.

    Distances print with the shortest round-trip float representation, so
    identical graphs produce byte-identical files.
    """
    with open(path, "w") as f:
        f.write(f"{g.n} {g.m} {float(g.eps)!r} {g.metric_kind}\n")
        for u, v, d in zip(g.u.tolist(), g.v.tolist(), g.dist.tolist()):
            f.write(f"{u} {v} {d!r}\n")


def read_edge_list(path: str) -> NeighborGraph:
    with open(path) as f:
        header = f.readline().split()
        if len(header) != 4:
            raise ParseError("edge-list header must be 'n m epsilon metric'", 1)
        try:
            n, m, eps = int(header[0]), int(header[1]), float(header[2])
        except ValueError as e:
            raise ParseError(f"bad edge-list header: {e}", 1) from None
        metric_kind = header[3]
        u = np.empty(m, dtype=np.int64)
        v = np.empty(m, dtype=np.int64)
        d = np.empty(m, dtype=np.float64)
        for i in range(m):
            parts = f.readline().split()
            if len(parts) != 3:
                raise ParseError(f"expected 'u v dist', got {parts!r}", i + 2)
            try:
                u[i], v[i], d[i] = int(parts[0]), int(parts[1]), float(parts[2])
            except ValueError as e:
                raise ParseError(f"bad edge line: {e}", i + 2) from None
        if f.readline().strip():
            raise ParseError("trailing content after declared edge count", m + 2)
    return NeighborGraph(n, eps, metric_kind, u, v, d)
