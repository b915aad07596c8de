"""Metric-space abstraction: point storage, distance functions, eval counting.

A :class:`PointSet` stores points of one of three kinds — fixed-dimension
float vectors, fixed-length packed bit vectors, or character strings — under
contiguous 0-based global ids.  A :class:`Metric` evaluates distances over
compatible point sets and counts every evaluation in ``eval_count`` (block
calls count one evaluation per pair).

Determinism: kernels accumulate in a fixed order, so d(a,b) == d(b,a)
bit-exactly and repeated runs reproduce identical floats.  Distance
functions are pure; ``eval_count`` is a plain monotone counter whose total
is exact (no ordering guarantees between concurrent callers).
"""

from __future__ import annotations

import random

import numpy as np

from . import _kernels
from .errors import InvalidInput

VECTOR, BITS, STRINGS = "vector", "bits", "strings"


def _as_codes(s) -> np.ndarray:
    """String (or int sequence) to int32 codepoint array."""
    if isinstance(s, str):
        return np.frombuffer(s.encode("utf-32-le"), dtype=np.int32)
    return np.asarray(s, dtype=np.int32)


class PointSet:
    """Immutable dense point storage; global ids are 0..n-1 in input order.

    Storage per kind:
      * ``vector``  — ``data`` float64 (n, dim)
      * ``bits``    — ``words`` uint64 (n, ceil(dim/64)), little-endian bits,
                      padding bits zero; ``dim`` is the bit length
      * ``strings`` — ``strings`` tuple plus flattened int32 codepoints
                      (``codes_flat``/``codes_off``); ``dim`` is 0

    ``meta`` carries generator annotations (cluster scale, labels, ...) and
    is not part of the point identity.
    """

    __slots__ = ("kind", "n", "dim", "data", "words", "strings", "codes_flat",
                 "codes_off", "meta", "_norms", "_ids")

    def __init__(self, kind, n, dim, data=None, words=None, strings=None,
                 codes_flat=None, codes_off=None, meta=None):
        self.kind = kind
        self.n = n
        self.dim = dim
        self.data = data
        self.words = words
        self.strings = strings
        self.codes_flat = codes_flat
        self.codes_off = codes_off
        self.meta = meta if meta is not None else {}
        self._norms = None
        self._ids = None

    @classmethod
    def from_vectors(cls, arr, meta=None) -> "PointSet":
        data = np.ascontiguousarray(np.asarray(arr, dtype=np.float64))
        if data.ndim != 2:
            raise InvalidInput(f"vector points must be 2-D, got shape {data.shape}")
        if data.size and not np.isfinite(data).all():
            raise InvalidInput("vector points must be finite (no NaN/inf)")
        data = data + 0.0  # normalize -0.0 so value keys match metric zeros
        return cls(VECTOR, data.shape[0], data.shape[1], data=data, meta=meta)

    @classmethod
    def from_bits(cls, bits, meta=None) -> "PointSet":
        """Pack an (n, nbits) array of 0/1 values into 64-bit words."""
        b = np.asarray(bits)
        if b.ndim != 2:
            raise InvalidInput(f"bit points must be 2-D, got shape {b.shape}")
        if b.size and not np.isin(b, (0, 1)).all():
            raise InvalidInput("bit points must contain only 0/1 values")
        n, nbits = b.shape
        nwords = max((nbits + 63) // 64, 1)
        padded = np.zeros((n, nwords * 64), dtype=np.uint8)
        padded[:, :nbits] = b
        packed = np.packbits(padded, axis=1, bitorder="little")
        words = np.ascontiguousarray(packed).view(np.uint64).reshape(n, nwords)
        return cls(BITS, n, nbits, words=np.ascontiguousarray(words), meta=meta)

    @classmethod
    def from_packed(cls, words, nbits, meta=None) -> "PointSet":
        w = np.ascontiguousarray(np.asarray(words, dtype=np.uint64))
        return cls(BITS, w.shape[0], nbits, words=w, meta=meta)

    @classmethod
    def from_strings(cls, strings, meta=None) -> "PointSet":
        strings = tuple(strings)
        codes = [_as_codes(s) for s in strings]
        off = np.zeros(len(strings) + 1, dtype=np.int64)
        if codes:
            np.cumsum([len(c) for c in codes], out=off[1:])
        flat = np.concatenate(codes) if codes else np.empty(0, dtype=np.int32)
        return cls(STRINGS, len(strings), 0, strings=strings,
                   codes_flat=np.ascontiguousarray(flat, dtype=np.int32),
                   codes_off=off, meta=meta)

    def ids_all(self) -> np.ndarray:
        if self._ids is None:
            self._ids = np.arange(self.n, dtype=np.int64)
        return self._ids

    def point(self, i: int):
        """Raw value of point i (row array, packed row, or str)."""
        if self.kind == VECTOR:
            return self.data[i]
        if self.kind == BITS:
            return self.words[i]
        return self.strings[i]

    def value_key(self, i: int):
        """Hashable exact-value key; equal keys imply distance zero."""
        if self.kind == VECTOR:
            return self.data[i].tobytes()
        if self.kind == BITS:
            return self.words[i].tobytes()
        return self.strings[i]

    def distinct_reps(self) -> np.ndarray:
        """Smallest id of every distinct point value, ascending."""
        seen = set()
        reps = []
        for i in range(self.n):
            k = self.value_key(i)
            if k not in seen:
                seen.add(k)
                reps.append(i)
        return np.asarray(reps, dtype=np.int64)

    def subset(self, idx) -> "PointSet":
        """New PointSet holding rows ``idx`` (re-indexed 0..k-1)."""
        idx = np.asarray(idx, dtype=np.int64)
        if self.kind == VECTOR:
            return PointSet(VECTOR, len(idx), self.dim,
                            data=np.ascontiguousarray(self.data[idx]))
        if self.kind == BITS:
            return PointSet(BITS, len(idx), self.dim,
                            words=np.ascontiguousarray(self.words[idx]))
        return PointSet.from_strings([self.strings[i] for i in idx])

    def raw_rows(self, idx) -> object:
        """Payload representation of rows ``idx`` (for message byte counts)."""
        idx = np.asarray(idx, dtype=np.int64)
        if self.kind == VECTOR:
            return self.data[idx]
        if self.kind == BITS:
            return self.words[idx]
        return [self.strings[i] for i in idx]

    def norms(self) -> np.ndarray:
        if self.kind != VECTOR:
            raise InvalidInput("norms are defined for vector points only")
        if self._norms is None:
            self._norms = _kernels.active.vector_norms(self.data)
        return self._norms

    def codes(self, i: int) -> np.ndarray:
        return self.codes_flat[self.codes_off[i]:self.codes_off[i + 1]]

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return f"PointSet(kind={self.kind!r}, n={self.n}, dim={self.dim})"


class Metric:
    """Distance function over one point kind, with an evaluation counter.

    ``zero_iff_equal_value`` declares whether computed distance 0 can only
    arise from bit-identical values; cosine sets it False (parallel vectors).
    """

    kind = "?"
    point_kind = VECTOR
    true_metric = True  # triangle inequality holds
    zero_iff_equal_value = True

    def __init__(self):
        self.eval_count = 0

    def check_points(self, pts: PointSet) -> None:
        if pts.kind != self.point_kind:
            raise InvalidInput(
                f"{self.kind} metric needs {self.point_kind} points, "
                f"got {pts.kind}")

    def _idx(self, pts: PointSet, idx) -> np.ndarray:
        if idx is None:
            return pts.ids_all()
        return np.ascontiguousarray(idx, dtype=np.int64)

    def dists(self, src: PointSet, i: int, dst: PointSet, idx=None) -> np.ndarray:
        """Distances from point ``src[i]`` to ``dst[idx]`` (all of dst if None)."""
        raise NotImplementedError

    def dists_pairs(self, a: PointSet, ai, b: PointSet, bi) -> np.ndarray:
        """Row-paired distances d(a[ai[t]], b[bi[t]])."""
        raise NotImplementedError

    def distance(self, a, b) -> float:
        """Distance between two raw point values; counts one evaluation."""
        raise NotImplementedError


class EuclideanMetric(Metric):
    kind = "euclidean"

    def dists(self, src, i, dst, idx=None):
        if src.dim != dst.dim:
            raise InvalidInput(f"dimension mismatch: {src.dim} vs {dst.dim}")
        idx = self._idx(dst, idx)
        self.eval_count += len(idx)
        return _kernels.active.euclidean_block(src.data[i], dst.data, idx)

    def dists_pairs(self, a, ai, b, bi):
        ai = self._idx(a, ai)
        bi = self._idx(b, bi)
        self.eval_count += len(ai)
        return _kernels.active.euclidean_rows(a.data, ai, b.data, bi)

    def distance(self, a, b):
        a = np.ascontiguousarray(a, dtype=np.float64)
        b = np.ascontiguousarray(b, dtype=np.float64)
        if a.shape != b.shape:
            raise InvalidInput(f"dimension mismatch: {a.shape} vs {b.shape}")
        self.eval_count += 1
        one = np.zeros(1, dtype=np.int64)
        return float(_kernels.active.euclidean_block(a, b.reshape(1, -1), one)[0])


class CosineMetric(Metric):
    """Cosine distance 1 - a.b/(|a||b|).

    Not a true metric (triangle inequality can fail); provided for query
    use.  Zero vectors are rejected by :meth:`check_points`.
    """

    kind = "cosine"
    true_metric = False
    zero_iff_equal_value = False

    def check_points(self, pts):
        super().check_points(pts)
        if pts.n and pts.norms().min() == 0.0:
            raise InvalidInput("cosine metric rejects zero vectors")

    def dists(self, src, i, dst, idx=None):
        if src.dim != dst.dim:
            raise InvalidInput(f"dimension mismatch: {src.dim} vs {dst.dim}")
        idx = self._idx(dst, idx)
        self.eval_count += len(idx)
        return _kernels.active.cosine_block(
            src.data[i], float(src.norms()[i]), dst.data, dst.norms(), idx)

    def dists_pairs(self, a, ai, b, bi):
        ai = self._idx(a, ai)
        bi = self._idx(b, bi)
        self.eval_count += len(ai)
        return _kernels.active.cosine_rows(a.data, a.norms(), ai,
                                           b.data, b.norms(), bi)

    def distance(self, a, b):
        a = np.ascontiguousarray(a, dtype=np.float64)
        b = np.ascontiguousarray(b, dtype=np.float64)
        if a.shape != b.shape:
            raise InvalidInput(f"dimension mismatch: {a.shape} vs {b.shape}")
        na = float(np.sqrt(np.dot(a, a)))
        nb = float(np.sqrt(np.dot(b, b)))
        if na == 0.0 or nb == 0.0:
            raise InvalidInput("cosine distance undefined for zero vectors")
        self.eval_count += 1
        one = np.zeros(1, dtype=np.int64)
        return float(_kernels.active.cosine_block(
            a, na, b.reshape(1, -1), np.array([nb]), one)[0])


class HammingMetric(Metric):
    kind = "hamming"
    point_kind = BITS

    def dists(self, src, i, dst, idx=None):
        if src.words.shape[1] != dst.words.shape[1]:
            raise InvalidInput("bit-width mismatch")
        idx = self._idx(dst, idx)
        self.eval_count += len(idx)
        return _kernels.active.hamming_block(src.words[i], dst.words, idx)

    def dists_pairs(self, a, ai, b, bi):
        ai = self._idx(a, ai)
        bi = self._idx(b, bi)
        self.eval_count += len(ai)
        return _kernels.active.hamming_rows(a.words, ai, b.words, bi)

    def distance(self, a, b):
        a = np.asarray(a)
        b = np.asarray(b)
        if a.dtype != np.uint64:  # 0/1 arrays get packed on the fly
            if a.shape != b.shape:
                raise InvalidInput(f"bit-width mismatch: {a.shape} vs {b.shape}")
            a = PointSet.from_bits(a.reshape(1, -1)).words[0]
            b = PointSet.from_bits(b.reshape(1, -1)).words[0]
        if a.shape != b.shape:
            raise InvalidInput(f"bit-width mismatch: {a.shape} vs {b.shape}")
        self.eval_count += 1
        one = np.zeros(1, dtype=np.int64)
        return float(_kernels.active.hamming_block(
            np.ascontiguousarray(a), np.ascontiguousarray(b).reshape(1, -1), one)[0])


class EditMetric(Metric):
    """Levenshtein distance, full dynamic programming (no banding)."""

    kind = "edit"
    point_kind = STRINGS

    def dists(self, src, i, dst, idx=None):
        idx = self._idx(dst, idx)
        self.eval_count += len(idx)
        return _kernels.active.edit_block(src.codes(i), dst.codes_flat,
                                          dst.codes_off, idx)

    def dists_pairs(self, a, ai, b, bi):
        ai = self._idx(a, ai)
        bi = self._idx(b, bi)
        self.eval_count += len(ai)
        return _kernels.active.edit_rows(a.codes_flat, a.codes_off, ai,
                                         b.codes_flat, b.codes_off, bi)

    def distance(self, a, b):
        qa = _as_codes(a)
        qb = _as_codes(b)
        self.eval_count += 1
        off = np.array([0, len(qb)], dtype=np.int64)
        one = np.zeros(1, dtype=np.int64)
        return float(_kernels.active.edit_block(qa, qb, off, one)[0])


METRICS = {
    "euclidean": EuclideanMetric,
    "cosine": CosineMetric,
    "hamming": HammingMetric,
    "edit": EditMetric,
}


def make_metric(kind: str) -> Metric:
    """Fresh metric instance (own eval counter) by name."""
    try:
        return METRICS[kind]()
    except KeyError:
        raise InvalidInput(f"unknown metric {kind!r} (have {sorted(METRICS)})") from None


def pairwise_max_distance(metric: Metric, pts: PointSet, anchor: int):
    """(farthest id, max distance) from ``anchor`` over all points.

    Ties break to the smallest id.
    """
    if pts.n == 0:
        raise InvalidInput("pairwise_max_distance on empty point set")
    d = metric.dists(pts, anchor, pts)
    far = int(np.argmax(d))  # first max = smallest id
    return far, float(d[far])


def zero_distance_groups(pts: PointSet, metric: Metric, members: np.ndarray):
    """Partition ``members`` into metric-duplicate groups (distance 0).

    Groups by exact value first; for metrics where distance 0 can occur
    between distinct values (cosine), merges value groups whose
    representatives are at distance 0.  Returns sorted id arrays ordered by
    smallest member.
    """
    buckets: dict = {}
    for i in members:
        buckets.setdefault(pts.value_key(int(i)), []).append(int(i))
    groups = list(buckets.values())
    if not metric.zero_iff_equal_value and len(groups) > 1:
        reps = [g[0] for g in groups]
        parent = list(range(len(reps)))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        idx = np.asarray(reps[1:], dtype=np.int64)
        for gi in range(len(reps) - 1):
            d = metric.dists(pts, reps[gi], pts, idx[gi:])
            for gj in np.flatnonzero(d == 0.0):
                ra, rb = find(gi), find(gi + 1 + int(gj))
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
        merged: dict = {}
        for gi, g in enumerate(groups):
            merged.setdefault(find(gi), []).extend(g)
        groups = list(merged.values())
    groups = [np.asarray(sorted(g), dtype=np.int64) for g in groups]
    groups.sort(key=lambda g: int(g[0]))
    return groups


def measure_expansion_constant(pts: PointSet, metric: Metric, sample: int,
                               radii=None, seed: int = 0) -> float:
    """Diagnostic doubling ratio max |B(p,2r)| / |B(p,r)|.

    Samples ``sample`` points and a geometric radius grid (or the supplied
    ``radii``); not the exact minimal expansion constant.
    """
    if pts.n == 0:
        raise InvalidInput("empty point set")
    if sample > pts.n:
        raise InvalidInput(f"sample {sample} exceeds n={pts.n}")
    metric.check_points(pts)
    rng = random.Random(seed)
    picks = sorted(rng.sample(range(pts.n), sample))
    best = 1.0
    for p in picks:
        ds = np.sort(metric.dists(pts, p, pts))
        rmax = float(ds[-1])
        if rmax == 0.0:
            continue
        grid = radii if radii is not None else rmax / 2.0 * 0.5 ** np.arange(6)
        for r in grid:
            if r <= 0:
                continue
            inner = int(np.searchsorted(ds, r, side="right"))
            outer = int(np.searchsorted(ds, 2.0 * r, side="right"))
            if inner > 0:
                best = max(best, outer / inner)
    return best
