"""Benchmark the compiled distance kernels against the numpy fallback.

Run as ``python -m epsgraph.bench_kernels``.  Times the raw block kernels
per metric and one end-to-end tree build + self-query per backend.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from . import _kernels
from .covertree import batch_query_flat, build_tree
from .io import gen_synthetic
from .metric import make_metric


def _time(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _kernel_cases(n: int, dim: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    vec = gen_synthetic("uniform-cube", n, dim, seed=seed)
    bits = gen_synthetic("bit-uniform", n, max(dim * 8, 64), seed=seed)
    strs = gen_synthetic("random-strings", min(n, 2000), seed=seed)
    idx_v = rng.integers(0, n, size=n).astype(np.int64)
    idx_s = rng.integers(0, strs.n, size=strs.n).astype(np.int64)
    qn = float(vec.norms()[0])

    def euclid(k):
        return lambda: k.euclidean_block(vec.data[0], vec.data, idx_v)

    def cosine(k):
        return lambda: k.cosine_block(vec.data[0], qn, vec.data,
                                      vec.norms(), idx_v)

    def hamming(k):
        return lambda: k.hamming_block(bits.words[0], bits.words, idx_v)

    def edit(k):
        return lambda: k.edit_block(strs.codes(0), strs.codes_flat,
                                    strs.codes_off, idx_s)

    return [("euclidean", n, euclid), ("cosine", n, cosine),
            ("hamming", n, hamming), ("edit", strs.n, edit)]


def _end_to_end(backend: str, n: int, dim: int, repeat: int) -> float:
    prev = _kernels.use_backend(backend)
    try:
        pts = gen_synthetic("gaussian-mixture", n, dim, clusters=8, seed=3)
        eps = 2.0 * pts.meta["cluster_scale"]

        def run():
            metric = make_metric("euclidean")
            tree = build_tree(pts, metric, leaf_size=10)
            batch_query_flat(tree, pts, metric, eps=eps)

        return _time(run, repeat)
    finally:
        _kernels.active = prev


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=100_000, help="block size")
    ap.add_argument("--dim", type=int, default=16)
    ap.add_argument("--tree-n", type=int, default=20_000,
                    help="points for the end-to-end build+query run")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    have_c = "compiled" in _kernels.BACKENDS
    print(f"backends: python{' + compiled' if have_c else ' only (extension not built)'}")
    print(f"{'kernel':<12} {'evals':>9} {'python':>10} {'compiled':>10} {'speedup':>8}")
    for name, evals, case in _kernel_cases(args.n, args.dim):
        t_py = _time(case(_kernels.BACKENDS["python"]), args.repeat)
        if have_c:
            t_c = _time(case(_kernels.BACKENDS["compiled"]), args.repeat)
            print(f"{name:<12} {evals:>9} {t_py:>9.4f}s {t_c:>9.4f}s "
                  f"{t_py / t_c:>7.1f}x")
        else:
            print(f"{name:<12} {evals:>9} {t_py:>9.4f}s {'-':>10} {'-':>8}")

    t_py = _end_to_end("python", args.tree_n, 8, args.repeat)
    line = (f"{'build+query':<12} {args.tree_n:>9} {t_py:>9.4f}s")
    if have_c:
        t_c = _end_to_end("compiled", args.tree_n, 8, args.repeat)
        line += f" {t_c:>9.4f}s {t_py / t_c:>7.1f}x"
    print(line)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
