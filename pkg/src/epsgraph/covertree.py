"""Batch cover tree construction and exact fixed-radius queries.

Construction is level-synchronous: a worklist of *hubs* (pending vertex
triples) is split level by level until every point sits in a leaf.  A hub
whose radius is zero holds only metric-duplicates and collapses to a single
duplicate-group leaf; a hub at or below the leaf-size budget emits one leaf
per distinct point.  Larger hubs are split greedily: child roots are chosen
farthest-point-first until the next candidate would sit within half the hub
radius of an existing root, then every member joins its nearest root.

The resulting tree satisfies, and :func:`check_invariants` verifies:
  * nesting — every non-leaf has a child on its own point;
  * covering — descendant leaves lie within the vertex radius;
  * separating — split siblings are pairwise more than half the split
    radius apart;
  * leaves are 1:1 with distinct points, duplicates sharing one leaf.

Levels are depth counters (root 0), not dyadic scales; all radii are the
exact triple radii, which is what the query descent rule uses.

Trees are immutable once built and safe to query concurrently.  The tie
rules (smallest id wins in argmax and nearest-root assignment, hubs split
in creation order) make construction deterministic.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput
from .metric import Metric, PointSet, zero_distance_groups

DUMP_VERSION = "epsgraph-covertree v1"


@dataclass
class VertexTriple:
    """A subtree under construction: members, root, exact radius.

    ``dists[k] == d(members[k], root)`` and ``farthest`` is the member
    realizing ``radius`` (smallest id on ties).  ``members`` stays sorted
    ascending.
    """

    members: np.ndarray
    root: int
    radius: float
    level: int
    dists: np.ndarray
    farthest: int


class CoverTree:
    """Array-backed cover tree over a PointSet.

    ``point_ids`` maps local point indices to caller ids (global ids when
    the tree indexes a subset of a larger set).  Vertex arrays are parallel:
    ``point`` (local point index), ``level``, ``radius``, ``parent``,
    ``split_radius`` (NaN unless the vertex was split), ``leaf_group``
    (member local indices for leaves, None otherwise).
    """

    def __init__(self, pts, point_ids, leaf_size, metric_kind, point, level,
                 radius, parent, children, split_radius, leaf_group):
        self.pts = pts
        self.point_ids = point_ids
        self.leaf_size = leaf_size
        self.metric_kind = metric_kind
        self.point = point
        self.level = level
        self.radius = radius
        self.parent = parent
        self.children = children
        self.split_radius = split_radius
        self.leaf_group = leaf_group
        self.root = 0
        self.leaf_of = np.full(pts.n, -1, dtype=np.int64)
        for vid, grp in enumerate(leaf_group):
            if grp is not None:
                self.leaf_of[grp] = vid

    @property
    def n_vertices(self) -> int:
        return len(self.point)

    def is_leaf(self, vid: int) -> bool:
        return self.leaf_group[vid] is not None

    def __repr__(self):
        return (f"CoverTree(n={self.pts.n}, vertices={self.n_vertices}, "
                f"leaf_size={self.leaf_size}, metric={self.metric_kind!r})")


def split_vertex(triple: VertexTriple, pts: PointSet, metric: Metric):
    """Split a hub into child triples (greedy farthest-point roots).

    Root selection stops when the next candidate's distance to the chosen
    roots drops to half the hub radius or below; members then join their
    nearest root (ties to the smallest root id).  Postconditions: child
    balls of radius r/2 cover the hub and roots are pairwise > r/2 apart.
    """
    if triple.radius <= 0.0:
        raise InvalidInput("cannot split a zero-radius hub (duplicate leaf case)")
    H = triple.members
    D = triple.dists.copy()
    assigned = np.full(len(H), triple.root, dtype=np.int64)
    half = triple.radius / 2.0
    roots = [triple.root]
    k = int(np.searchsorted(H, triple.farthest))
    while D[k] > half:
        c = int(H[k])
        roots.append(c)
        dv = metric.dists(pts, c, pts, H)
        closer = dv < D
        tie = (dv == D) & (c < assigned)
        D[closer] = dv[closer]
        assigned[closer] = c
        assigned[tie] = c
        k = int(np.argmax(D))  # first max = smallest member id
    out = []
    for c in roots:
        mask = assigned == c
        mem = H[mask]
        dm = D[mask]
        km = int(np.argmax(dm))
        out.append(VertexTriple(members=mem, root=c, radius=float(dm[km]),
                                level=triple.level + 1, dists=dm,
                                farthest=int(mem[km])))
    return out


def build_tree(pts: PointSet, metric: Metric, leaf_size: int = 10,
               point_ids=None) -> CoverTree:
    """Build a cover tree over ``pts`` (deterministic; root = point 0)."""
    metric.check_points(pts)
    if pts.n == 0:
        raise InvalidInput("cannot build a cover tree over an empty point set")
    if leaf_size < 1:
        raise InvalidInput("leaf_size must be >= 1")
    if point_ids is None:
        point_ids = pts.ids_all()
    else:
        point_ids = np.asarray(point_ids, dtype=np.int64)
        if len(point_ids) != pts.n:
            raise InvalidInput("point_ids length must match point count")

    point, level, radius, parent = [], [], [], []
    children, split_radius, leaf_group = [], [], []

    def add_vertex(pt, lvl, rad, par):
        vid = len(point)
        point.append(pt)
        level.append(lvl)
        radius.append(rad)
        parent.append(par)
        children.append([])
        split_radius.append(np.nan)
        leaf_group.append(None)
        if par >= 0:
            children[par].append(vid)
        return vid

    d0 = metric.dists(pts, 0, pts)
    far = int(np.argmax(d0))
    root_triple = VertexTriple(members=pts.ids_all().copy(), root=0,
                               radius=float(d0[far]), level=0, dists=d0,
                               farthest=far)
    v0 = add_vertex(0, 0, root_triple.radius, -1)
    queue = deque([(v0, root_triple)])
    while queue:
        vid, tr = queue.popleft()
        if tr.radius == 0.0:
            if len(tr.members) == 1:
                leaf_group[vid] = tr.members
            else:
                # all metric-duplicates: one shared leaf below the hub vertex
                u = add_vertex(tr.root, tr.level + 1, 0.0, vid)
                leaf_group[u] = tr.members
        elif len(tr.members) <= leaf_size:
            for grp in zero_distance_groups(pts, metric, tr.members):
                pt = tr.root if tr.root in grp else int(grp[0])
                u = add_vertex(pt, tr.level + 1, 0.0, vid)
                leaf_group[u] = grp
        else:
            split_radius[vid] = tr.radius
            for ct in split_vertex(tr, pts, metric):
                u = add_vertex(ct.root, ct.level, ct.radius, vid)
                queue.append((u, ct))

    return CoverTree(
        pts=pts, point_ids=point_ids, leaf_size=leaf_size,
        metric_kind=metric.kind,
        point=np.asarray(point, dtype=np.int64),
        level=np.asarray(level, dtype=np.int64),
        radius=np.asarray(radius, dtype=np.float64),
        parent=np.asarray(parent, dtype=np.int64),
        children=[np.asarray(c, dtype=np.int64) for c in children],
        split_radius=np.asarray(split_radius, dtype=np.float64),
        leaf_group=leaf_group,
    )


def range_query(tree: CoverTree, qpts: PointSet, qi: int, eps: float,
                metric: Metric):
    """All points within ``eps`` of query ``qpts[qi]`` as (ids, dists).

    Reference single-query traversal: descend into children whose ball
    (radius + eps) contains the query; test leaves directly.  Duplicate
    groups expand to every member id.  Results sort by id.
    """
    if eps < 0:
        raise InvalidInput("eps must be nonnegative")
    ids_out, d_out = [], []
    stack = [tree.root]
    while stack:
        u = stack.pop()
        if tree.is_leaf(u):
            d = float(metric.dists(qpts, qi, tree.pts,
                                   tree.point[u:u + 1].copy())[0])
            # leaf vertex distance is to the group representative point
            if d <= eps:
                grp = tree.leaf_group[u]
                ids_out.append(tree.point_ids[grp])
                d_out.append(np.full(len(grp), d))
        else:
            kids = tree.children[u]
            dk = metric.dists(qpts, qi, tree.pts, tree.point[kids])
            for c, d in zip(kids, dk):
                if d <= tree.radius[c] + eps:
                    stack.append(int(c))
    if not ids_out:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.float64)
    ids = np.concatenate(ids_out)
    ds = np.concatenate(d_out)
    order = np.argsort(ids)
    return ids[order], ds[order]


def batch_query_flat(tree: CoverTree, qpts: PointSet, metric: Metric,
                     eps: float | None = None, radii=None, query_idx=None):
    """Batched traversal carrying the surviving query set per vertex.

    ``radii`` gives a per-query radius (overrides ``eps``).  Returns flat
    arrays (query index into qpts, hit id in tree.point_ids, distance); a
    pair appears once per (query, member).  Since leaves have radius zero,
    the admission test at a leaf is already the epsilon test, so each
    surviving (vertex, query) pair costs exactly one distance evaluation.
    """
    if query_idx is None:
        query_idx = qpts.ids_all()
    else:
        query_idx = np.asarray(query_idx, dtype=np.int64)
    if radii is None:
        if eps is None or eps < 0:
            raise InvalidInput("need eps >= 0 or explicit radii")
        radii = np.full(len(query_idx), float(eps))
    else:
        radii = np.asarray(radii, dtype=np.float64)
        if len(radii) != len(query_idx):
            raise InvalidInput("radii length must match query count")
        if len(radii) and radii.min() < 0:
            raise InvalidInput("radii must be nonnegative")
    out_q, out_hit, out_d = [], [], []

    def emit(vid, qs, ds):
        grp = tree.leaf_group[vid]
        out_q.append(np.repeat(qs, len(grp)))
        out_hit.append(np.tile(grp, len(qs)))
        out_d.append(np.repeat(ds, len(grp)))

    if len(query_idx) == 0:
        pass
    elif tree.is_leaf(tree.root):
        d = metric.dists(tree.pts, tree.point[tree.root], qpts, query_idx)
        ok = d <= radii
        if ok.any():
            emit(tree.root, query_idx[ok], d[ok])
    else:
        stack = [(tree.root, query_idx, radii)]
        while stack:
            vid, qs, rs = stack.pop()
            for c in tree.children[vid]:
                d = metric.dists(tree.pts, tree.point[c], qpts, qs)
                if tree.is_leaf(c):
                    ok = d <= rs
                    if ok.any():
                        emit(int(c), qs[ok], d[ok])
                else:
                    ok = d <= tree.radius[c] + rs
                    if ok.any():
                        stack.append((int(c), qs[ok], rs[ok]))
    if not out_q:
        e = np.empty(0, dtype=np.int64)
        return e, e.copy(), np.empty(0, dtype=np.float64)
    return (np.concatenate(out_q),
            tree.point_ids[np.concatenate(out_hit)],
            np.concatenate(out_d))


def batch_range_query(tree: CoverTree, qpts: PointSet, eps: float,
                      metric: Metric, query_idx=None):
    """Per-query neighbor sets; identical results to mapping range_query."""
    if query_idx is None:
        query_idx = qpts.ids_all()
    else:
        query_idx = np.asarray(query_idx, dtype=np.int64)
    q, hit, d = batch_query_flat(tree, qpts, metric, eps=eps,
                                 query_idx=query_idx)
    order = np.lexsort((hit, q))
    q, hit, d = q[order], hit[order], d[order]
    pos = {int(qi): t for t, qi in enumerate(query_idx)}
    out = [(np.empty(0, dtype=np.int64), np.empty(0, dtype=np.float64))
           for _ in query_idx]
    bounds = np.flatnonzero(np.diff(q)) + 1 if len(q) else np.empty(0, int)
    for lo, hi in zip(np.concatenate(([0], bounds)),
                      np.concatenate((bounds, [len(q)]))):
        if hi > lo:
            out[pos[int(q[lo])]] = (hit[lo:hi], d[lo:hi])
    return out


def check_invariants(tree: CoverTree, metric: Metric, tol: float = 1e-12):
    """Verify nesting/covering/separating/duplicate-leaf invariants.

    Returns a list of violation messages (empty when the tree is valid).
    ``tol`` only cushions the covering comparison for metrics where
    duplicate-group members are not bit-identical values.
    """
    bad = []
    nv = tree.n_vertices
    pts = tree.pts

    for vid in range(nv):
        if tree.is_leaf(vid):
            if len(tree.children[vid]):
                bad.append(f"leaf {vid} has children")
        elif len(tree.children[vid]) == 0:
            bad.append(f"non-leaf {vid} has no children")
        for c in tree.children[vid]:
            if tree.parent[c] != vid:
                bad.append(f"parent link broken at {c}")
            if tree.level[c] != tree.level[vid] + 1:
                bad.append(f"level of {c} is not parent level + 1")

    # nesting
    for vid in range(nv):
        if not tree.is_leaf(vid):
            if not any(tree.point[c] == tree.point[vid]
                       for c in tree.children[vid]):
                bad.append(f"nesting broken at vertex {vid}")

    # covering against all descendant leaf members, plus radius tightness
    desc: list = [None] * nv
    for vid in range(nv - 1, -1, -1):
        if tree.is_leaf(vid):
            desc[vid] = tree.leaf_group[vid]
        else:
            desc[vid] = np.concatenate([desc[c] for c in tree.children[vid]])
        d = metric.dists(pts, int(tree.point[vid]), pts, desc[vid])
        slack = tol * max(1.0, tree.radius[vid])
        if d.max() > tree.radius[vid] + slack:
            bad.append(f"covering broken at vertex {vid}: "
                       f"{d.max()!r} > radius {tree.radius[vid]!r}")
        if d.max() < tree.radius[vid] - slack:
            bad.append(f"radius of vertex {vid} is not tight")

    # sibling separation at the recorded split radius
    for vid in range(nv):
        r = tree.split_radius[vid]
        if np.isnan(r):
            continue
        kids = tree.children[vid]
        kpts = tree.point[kids]
        for a in range(len(kids) - 1):
            d = metric.dists(pts, int(kpts[a]), pts, kpts[a + 1:])
            if d.min() <= r / 2.0:
                bad.append(f"separation broken under vertex {vid}: "
                           f"{d.min()!r} <= {r / 2.0!r}")

    # duplicate-leaf bijection
    leaves = [vid for vid in range(nv) if tree.is_leaf(vid)]
    allmem = (np.sort(np.concatenate([tree.leaf_group[v] for v in leaves]))
              if leaves else np.empty(0, dtype=np.int64))
    if len(allmem) != pts.n or (allmem != np.arange(pts.n)).any():
        bad.append("leaf groups do not partition the point set")
    for vid in leaves:
        grp = tree.leaf_group[vid]
        d = metric.dists(pts, int(tree.point[vid]), pts, grp)
        if d.max() > 0.0:
            bad.append(f"leaf {vid} group member at nonzero distance")
    keys = {pts.value_key(int(tree.point[v])) for v in leaves}
    if len(keys) != len(leaves):
        bad.append("two leaves share one point value")
    if not metric.zero_iff_equal_value and 1 < len(leaves) <= 2000:
        reps = np.asarray([tree.point[v] for v in leaves], dtype=np.int64)
        for a in range(len(reps) - 1):
            d = metric.dists(pts, int(reps[a]), pts, reps[a + 1:])
            if (d == 0.0).any():
                bad.append("two leaves at metric distance zero")
    return bad


def dump_text(tree: CoverTree) -> str:
    """Versioned debug dump (stable across runs; used by golden tests)."""
    lines = [DUMP_VERSION,
             f"n={tree.pts.n} vertices={tree.n_vertices} "
             f"leaf_size={tree.leaf_size} metric={tree.metric_kind}"]
    for vid in range(tree.n_vertices):
        grp = tree.leaf_group[vid]
        leaf = ",".join(str(tree.point_ids[i]) for i in grp) if grp is not None else "-"
        kids = ",".join(str(c) for c in tree.children[vid]) or "-"
        sr = float(tree.split_radius[vid])
        lines.append(
            f"v {vid} point={tree.point_ids[tree.point[vid]]} "
            f"level={tree.level[vid]} radius={float(tree.radius[vid])!r} "
            f"parent={tree.parent[vid]} split_radius={'-' if np.isnan(sr) else repr(sr)} "
            f"leaf=[{leaf}] children=[{kids}]")
    return "\n".join(lines) + "\n"
