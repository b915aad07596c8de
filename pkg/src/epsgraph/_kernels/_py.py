"""Pure Python (numpy) distance kernels.

Fallback backend used when the compiled extension is unavailable or when
``EPSGRAPH_KERNELS=python`` is set.  Signatures and semantics match
``_ckern`` exactly: every ``*_block`` kernel evaluates one query value
against ``data[idx]`` and returns a float64 distance array; every
``*_rows`` kernel evaluates paired rows.

Determinism notes: accumulation within a single backend is fixed, so
repeated runs give bit-identical results.  The two backends may differ in
the last ulp for euclidean/cosine (numpy reductions are unrolled); hamming
and edit distances are integer-exact in both.
"""

from __future__ import annotations

import numpy as np


def vector_norms(data: np.ndarray) -> np.ndarray:
    """Euclidean norm of every row."""
    return np.sqrt(np.einsum("ij,ij->i", data, data))


def euclidean_block(q: np.ndarray, data: np.ndarray, idx: np.ndarray) -> np.ndarray:
    diff = data[idx] - q
    return np.sqrt(np.einsum("ij,ij->i", diff, diff))


def euclidean_rows(a: np.ndarray, ai: np.ndarray, b: np.ndarray, bi: np.ndarray) -> np.ndarray:
    diff = a[ai] - b[bi]
    return np.sqrt(np.einsum("ij,ij->i", diff, diff))


def cosine_block(
    q: np.ndarray,
    qnorm: float,
    data: np.ndarray,
    norms: np.ndarray,
    idx: np.ndarray,
) -> np.ndarray:
    rows = data[idx]
    dots = np.einsum("ij,j->i", rows, q)
    out = np.maximum(1.0 - dots / (qnorm * norms[idx]), 0.0)
    # identical values must give exactly 0 regardless of rounding
    out[(rows == q).all(axis=1)] = 0.0
    return out


def cosine_rows(
    a: np.ndarray,
    anorms: np.ndarray,
    ai: np.ndarray,
    b: np.ndarray,
    bnorms: np.ndarray,
    bi: np.ndarray,
) -> np.ndarray:
    ra, rb = a[ai], b[bi]
    dots = np.einsum("ij,ij->i", ra, rb)
    out = np.maximum(1.0 - dots / (anorms[ai] * bnorms[bi]), 0.0)
    out[(ra == rb).all(axis=1)] = 0.0
    return out


def hamming_block(q: np.ndarray, words: np.ndarray, idx: np.ndarray) -> np.ndarray:
    x = words[idx] ^ q
    return np.bitwise_count(x).sum(axis=1).astype(np.float64)


def hamming_rows(a: np.ndarray, ai: np.ndarray, b: np.ndarray, bi: np.ndarray) -> np.ndarray:
    x = a[ai] ^ b[bi]
    return np.bitwise_count(x).sum(axis=1).astype(np.float64)


def _edit_pair(a: np.ndarray, b: np.ndarray) -> int:
    """Levenshtein distance between two int32 code arrays, full DP."""
    la, lb = len(a), len(b)
    if la == 0:
        return lb
    if lb == 0:
        return la
    jj = np.arange(lb + 1, dtype=np.int64)
    prev = jj.copy()
    cur = np.empty(lb + 1, dtype=np.int64)
    for i in range(la):
        cur[0] = i + 1
        np.minimum(prev[:-1] + (b != a[i]), prev[1:] + 1, out=cur[1:])
        # close insertions: cur[j] = min_{k<=j} cur[k] + (j - k)
        np.add(np.minimum.accumulate(cur - jj), jj, out=cur)
        prev, cur = cur, prev
    return int(prev[lb])


def edit_block(
    q: np.ndarray,
    flat: np.ndarray,
    offsets: np.ndarray,
    idx: np.ndarray,
) -> np.ndarray:
    out = np.empty(len(idx), dtype=np.float64)
    for t, i in enumerate(idx):
        out[t] = _edit_pair(q, flat[offsets[i] : offsets[i + 1]])
    return out


def edit_rows(
    aflat: np.ndarray,
    aoff: np.ndarray,
    ai: np.ndarray,
    bflat: np.ndarray,
    boff: np.ndarray,
    bi: np.ndarray,
) -> np.ndarray:
    out = np.empty(len(ai), dtype=np.float64)
    for t in range(len(ai)):
        a = aflat[aoff[ai[t]] : aoff[ai[t] + 1]]
        b = bflat[boff[bi[t]] : boff[bi[t] + 1]]
        out[t] = _edit_pair(a, b)
    return out
