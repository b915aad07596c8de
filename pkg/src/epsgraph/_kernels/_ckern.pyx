# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled distance kernels (hot path).

Mirrors ``epsgraph._kernels._py`` function for function.  Accumulation is
plain sequential order so results are deterministic and bit-symmetric in
the argument order.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

ctypedef cnp.float64_t f64
ctypedef cnp.int64_t i64
ctypedef cnp.int32_t i32
ctypedef cnp.uint64_t u64


cdef inline u64 popcount64(u64 x) nogil:
    x = x - ((x >> 1) & <u64>0x5555555555555555)
    x = (x & <u64>0x3333333333333333) + ((x >> 2) & <u64>0x3333333333333333)
    x = (x + (x >> 4)) & <u64>0x0F0F0F0F0F0F0F0F
    return (x * <u64>0x0101010101010101) >> 56


def vector_norms(const double[:, ::1] data):
    cdef Py_ssize_t n = data.shape[0], d = data.shape[1], i, c
    cdef double s
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    for i in range(n):
        s = 0.0
        for c in range(d):
            s += data[i, c] * data[i, c]
        o[i] = sqrt(s)
    return out


def euclidean_block(const double[::1] q, const double[:, ::1] data, const i64[::1] idx):
    cdef Py_ssize_t k = idx.shape[0], d = q.shape[0], t, c
    cdef i64 i
    cdef double s, diff
    out = np.empty(k, dtype=np.float64)
    cdef double[::1] o = out
    for t in range(k):
        i = idx[t]
        s = 0.0
        for c in range(d):
            diff = data[i, c] - q[c]
            s += diff * diff
        o[t] = sqrt(s)
    return out


def euclidean_rows(const double[:, ::1] a, const i64[::1] ai, const double[:, ::1] b, const i64[::1] bi):
    cdef Py_ssize_t k = ai.shape[0], d = a.shape[1], t, c
    cdef double s, diff
    out = np.empty(k, dtype=np.float64)
    cdef double[::1] o = out
    for t in range(k):
        s = 0.0
        for c in range(d):
            diff = a[ai[t], c] - b[bi[t], c]
            s += diff * diff
        o[t] = sqrt(s)
    return out


def cosine_block(const double[::1] q, double qnorm, const double[:, ::1] data,
                 const double[::1] norms, const i64[::1] idx):
    cdef Py_ssize_t k = idx.shape[0], d = q.shape[0], t, c
    cdef i64 i
    cdef double dot, v
    cdef bint same
    out = np.empty(k, dtype=np.float64)
    cdef double[::1] o = out
    for t in range(k):
        i = idx[t]
        dot = 0.0
        same = True
        for c in range(d):
            dot += data[i, c] * q[c]
            if data[i, c] != q[c]:
                same = False
        if same:
            o[t] = 0.0
        else:
            v = 1.0 - dot / (qnorm * norms[i])
            o[t] = v if v > 0.0 else 0.0
    return out


def cosine_rows(const double[:, ::1] a, const double[::1] anorms, const i64[::1] ai,
                const double[:, ::1] b, const double[::1] bnorms, const i64[::1] bi):
    cdef Py_ssize_t k = ai.shape[0], d = a.shape[1], t, c
    cdef i64 i, j
    cdef double dot, v
    cdef bint same
    out = np.empty(k, dtype=np.float64)
    cdef double[::1] o = out
    for t in range(k):
        i = ai[t]
        j = bi[t]
        dot = 0.0
        same = True
        for c in range(d):
            dot += a[i, c] * b[j, c]
            if a[i, c] != b[j, c]:
                same = False
        if same:
            o[t] = 0.0
        else:
            v = 1.0 - dot / (anorms[i] * bnorms[j])
            o[t] = v if v > 0.0 else 0.0
    return out


def hamming_block(const u64[::1] q, const u64[:, ::1] words, const i64[::1] idx):
    cdef Py_ssize_t k = idx.shape[0], w = q.shape[0], t, c
    cdef i64 i
    cdef u64 acc
    out = np.empty(k, dtype=np.float64)
    cdef double[::1] o = out
    for t in range(k):
        i = idx[t]
        acc = 0
        for c in range(w):
            acc += popcount64(words[i, c] ^ q[c])
        o[t] = <double>acc
    return out


def hamming_rows(const u64[:, ::1] a, const i64[::1] ai, const u64[:, ::1] b, const i64[::1] bi):
    cdef Py_ssize_t k = ai.shape[0], w = a.shape[1], t, c
    cdef u64 acc
    out = np.empty(k, dtype=np.float64)
    cdef double[::1] o = out
    for t in range(k):
        acc = 0
        for c in range(w):
            acc += popcount64(a[ai[t], c] ^ b[bi[t], c])
        o[t] = <double>acc
    return out


cdef i64 _edit_pair(const i32* a, Py_ssize_t la, const i32* b, Py_ssize_t lb,
                    i64* buf) nogil:
    # buf has room for lb + 1 entries; single rolling row
    cdef Py_ssize_t i, j
    cdef i64 prev_diag, tmp, best
    if la == 0:
        return lb
    if lb == 0:
        return la
    for j in range(lb + 1):
        buf[j] = j
    for i in range(la):
        prev_diag = buf[0]
        buf[0] = i + 1
        for j in range(1, lb + 1):
            tmp = buf[j]
            best = prev_diag + (a[i] != b[j - 1])
            if buf[j] + 1 < best:
                best = buf[j] + 1
            if buf[j - 1] + 1 < best:
                best = buf[j - 1] + 1
            buf[j] = best
            prev_diag = tmp
    return buf[lb]


def edit_block(const i32[::1] q, const i32[::1] flat, const i64[::1] offsets, const i64[::1] idx):
    cdef Py_ssize_t k = idx.shape[0], t
    cdef i64 i, lo, hi, maxlen = q.shape[0]
    for t in range(k):
        i = idx[t]
        if offsets[i + 1] - offsets[i] > maxlen:
            maxlen = offsets[i + 1] - offsets[i]
    out = np.empty(k, dtype=np.float64)
    buf_arr = np.empty(maxlen + 1, dtype=np.int64)
    cdef double[::1] o = out
    cdef i64[::1] buf = buf_arr
    cdef Py_ssize_t lq = q.shape[0]
    for t in range(k):
        i = idx[t]
        lo = offsets[i]
        hi = offsets[i + 1]
        o[t] = <double>_edit_pair(
            &q[0] if lq else NULL, lq,
            &flat[lo] if hi > lo else NULL, hi - lo,
            &buf[0])
    return out


def edit_rows(const i32[::1] aflat, const i64[::1] aoff, const i64[::1] ai,
              const i32[::1] bflat, const i64[::1] boff, const i64[::1] bi):
    cdef Py_ssize_t k = ai.shape[0], t
    cdef i64 i, j, alo, ahi, blo, bhi, maxlen = 0
    for t in range(k):
        j = bi[t]
        if boff[j + 1] - boff[j] > maxlen:
            maxlen = boff[j + 1] - boff[j]
    out = np.empty(k, dtype=np.float64)
    buf_arr = np.empty(maxlen + 1, dtype=np.int64)
    cdef double[::1] o = out
    cdef i64[::1] buf = buf_arr
    for t in range(k):
        i = ai[t]
        j = bi[t]
        alo = aoff[i]
        ahi = aoff[i + 1]
        blo = boff[j]
        bhi = boff[j + 1]
        o[t] = <double>_edit_pair(
            &aflat[alo] if ahi > alo else NULL, ahi - alo,
            &bflat[blo] if bhi > blo else NULL, bhi - blo,
            &buf[0])
    return out
