"""Dataset ingestion, synthetic generation, and run configuration.

Binary vector formats follow the ANN-benchmark record layout: a 4-byte
little-endian signed dimension, then that many values (float32 for fvecs,
uint8 for bvecs, int32 for ivecs); every record must share one dimension.
CSV holds numeric rows (0/1 rows packed to bits for the hamming metric) or,
for the edit metric, one string per line.  All loaders reject non-finite
coordinates.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidInput, ParseError
from .metric import PointSet

_VEC_KINDS = {
    "fvecs": (np.dtype("<f4"), 4),
    "bvecs": (np.dtype("u1"), 1),
    "ivecs": (np.dtype("<i4"), 4),
}


def _load_vecs(path: str, fmt: str) -> PointSet:
    dtype, itemsize = _VEC_KINDS[fmt]
    raw = np.fromfile(path, dtype=np.uint8)
    if raw.size == 0:
        return PointSet.from_vectors(np.empty((0, 0)))
    if raw.size < 4:
        raise ParseError(f"{fmt} file shorter than one dimension field", 0)
    dim = int(raw[:4].view("<i4")[0])
    if dim <= 0:
        raise ParseError(f"{fmt} record dimension {dim} must be positive", 0)
    record = 4 + dim * itemsize
    if raw.size % record:
        raise ParseError(
            f"{fmt} file truncated: {raw.size} bytes is not a multiple of "
            f"record size {record}", (raw.size // record) * record)
    recs = raw.reshape(-1, record)
    dims = recs[:, :4].copy().view("<i4").ravel()
    bad = np.flatnonzero(dims != dim)
    if len(bad):
        raise ParseError(
            f"{fmt} record {bad[0]} declares dimension {dims[bad[0]]}, "
            f"expected {dim}", int(bad[0]) * record)
    vals = recs[:, 4:].copy().view(dtype).astype(np.float64)
    if not np.isfinite(vals).all():
        raise ParseError(f"{fmt} file contains non-finite values", 0)
    return PointSet.from_vectors(vals)


def load_fvecs(path: str) -> PointSet:
    return _load_vecs(path, "fvecs")


def load_bvecs(path: str) -> PointSet:
    return _load_vecs(path, "bvecs")


def load_ivecs(path: str) -> PointSet:
    return _load_vecs(path, "ivecs")


def _write_vecs(path: str, pts: PointSet, fmt: str) -> None:
    dtype, _ = _VEC_KINDS[fmt]
    if pts.kind != "vector":
        raise InvalidInput(f"{fmt} writer needs vector points")
    with open(path, "wb") as f:
        dim = np.int32(pts.dim).astype("<i4")
        for i in range(pts.n):
            f.write(dim.tobytes())
            f.write(pts.data[i].astype(dtype).tobytes())


def write_fvecs(path: str, pts: PointSet) -> None:
    _write_vecs(path, pts, "fvecs")


def write_bvecs(path: str, pts: PointSet) -> None:
    _write_vecs(path, pts, "bvecs")


def write_ivecs(path: str, pts: PointSet) -> None:
    _write_vecs(path, pts, "ivecs")


def load_csv(path: str, metric_kind: str) -> PointSet:
    """Numeric CSV rows; 0/1 rows for hamming; one string per line for edit."""
    with open(path) as f:
        lines = [ln.rstrip("\n") for ln in f]
    lines = [ln for ln in lines if ln.strip()]
    if metric_kind == "edit":
        return PointSet.from_strings(lines)
    rows = []
    width = None
    for lineno, ln in enumerate(lines, 1):
        try:
            row = [float(x) for x in ln.replace(",", " ").split()]
        except ValueError as e:
            raise ParseError(f"bad CSV row: {e}", lineno) from None
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ParseError(
                f"CSV row has {len(row)} fields, expected {width}", lineno)
        rows.append(row)
    arr = np.asarray(rows, dtype=np.float64) if rows else np.empty((0, 0))
    if arr.size and not np.isfinite(arr).all():
        raise ParseError("CSV contains non-finite values")
    if metric_kind == "hamming":
        return PointSet.from_bits(arr.astype(np.int64))
    return PointSet.from_vectors(arr)


def write_csv(path: str, pts: PointSet) -> None:
    with open(path, "w") as f:
        if pts.kind == "strings":
            for s in pts.strings:
                f.write(s + "\n")
        elif pts.kind == "vector":
            for i in range(pts.n):
                f.write(",".join(repr(x) for x in pts.data[i].tolist()) + "\n")
        else:
            raise InvalidInput("CSV writer supports vector or string points")


SYNTH_KINDS = ("uniform-cube", "gaussian-mixture", "bit-uniform", "random-strings")


def gen_synthetic(kind: str, n: int, dim: int = 8, clusters: int = 10,
                  seed: int = 0, scale: float = 0.02,
                  length=(6, 12), alphabet: str = "ACGT") -> PointSet:
    """Seeded synthetic datasets (reproducible bytes for a given seed).

    gaussian-mixture records its generating ``cluster_scale``, ``labels``
    and ``centers`` in ``meta`` for threshold selection and recovery tests.
    """
    rng = np.random.default_rng(seed)
    if kind == "uniform-cube":
        return PointSet.from_vectors(rng.random((n, dim)))
    if kind == "gaussian-mixture":
        centers = rng.random((clusters, dim))
        labels = rng.integers(0, clusters, size=n)
        data = centers[labels] + rng.normal(0.0, scale, size=(n, dim))
        return PointSet.from_vectors(
            data, meta={"cluster_scale": scale, "labels": labels,
                        "centers": centers})
    if kind == "bit-uniform":
        return PointSet.from_bits(rng.integers(0, 2, size=(n, dim),
                                               dtype=np.uint8))
    if kind == "random-strings":
        lo, hi = length
        lens = rng.integers(lo, hi + 1, size=n)
        letters = np.array(list(alphabet))
        return PointSet.from_strings(
            ["".join(letters[rng.integers(0, len(letters), size=l)])
             for l in lens])
    raise InvalidInput(f"unknown synthetic kind {kind!r} (have {SYNTH_KINDS})")


CONFIG_KEYS = {
    "dataset": str, "metric": str, "algorithm": str, "out": str,
    "trace": str, "stats": str, "centers": str, "format": str,
    "n": int, "dim": int, "clusters": int, "ranks": int, "cells": int,
    "leaf_size": int, "seed": int,
    "scale": float,
    "epsilon": "floats",
}


def parse_config(path: str) -> dict:
    """Key-value run configuration ('key = value', '#' comments)."""
    out: dict = {}
    with open(path) as f:
        for lineno, ln in enumerate(f, 1):
            ln = ln.split("#", 1)[0].strip()
            if not ln:
                continue
            if "=" not in ln:
                raise ParseError(f"expected 'key = value', got {ln!r}", lineno)
            key, val = (s.strip() for s in ln.split("=", 1))
            if key not in CONFIG_KEYS:
                raise ParseError(f"unknown config key {key!r}", lineno)
            typ = CONFIG_KEYS[key]
            try:
                if typ == "floats":
                    out[key] = [float(x) for x in val.replace(",", " ").split()]
                else:
                    out[key] = typ(val)
            except ValueError as e:
                raise ParseError(f"bad value for {key!r}: {e}", lineno) from None
    return out


def load_dataset(spec: str, metric_kind: str, n: int = 1000, dim: int = 8,
                 clusters: int = 10, seed: int = 0,
                 scale: float = 0.02) -> PointSet:
    """Dataset by path (extension-dispatched) or 'synth:<kind>' descriptor."""
    if spec.startswith("synth:"):
        return gen_synthetic(spec[len("synth:"):], n=n, dim=dim,
                             clusters=clusters, seed=seed, scale=scale)
    lower = spec.lower()
    if lower.endswith(".fvecs"):
        return load_fvecs(spec)
    if lower.endswith(".bvecs"):
        return load_bvecs(spec)
    if lower.endswith(".ivecs"):
        return load_ivecs(spec)
    if lower.endswith(".csv") or lower.endswith(".txt"):
        return load_csv(spec, metric_kind)
    raise InvalidInput(
        f"cannot infer dataset format of {spec!r} "
        "(use .fvecs/.bvecs/.ivecs/.csv/.txt or synth:<kind>)")
