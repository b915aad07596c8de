"""Command-line entry point for batch graph construction and verification.

Exit codes: 0 success, 2 usage error, 3 dataset/config/graph parse error,
4 verification failure, 1 unexpected internal error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time

from . import graph as graphmod
from . import io as dataio
from ._kernels import backend_name
from .comm import Communicator
from .errors import EpsGraphError, ParseError
from .landmark import run_landmark
from .metric import make_metric
from .oracle import brute_graph
from .systolic import run_systolic

EXIT_OK, EXIT_INTERNAL, EXIT_USAGE, EXIT_DATA, EXIT_VERIFY = 0, 1, 2, 3, 4

ALGORITHMS = ("systolic-ring", "landmark-coll", "landmark-ring")


def _add_dataset_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dataset", help="path or synth:<kind> descriptor")
    p.add_argument("--metric", choices=("euclidean", "cosine", "hamming", "edit"))
    p.add_argument("--n", type=int, help="synthetic point count")
    p.add_argument("--dim", type=int, help="synthetic dimension / bit length")
    p.add_argument("--clusters", type=int, help="synthetic mixture components")
    p.add_argument("--scale", type=float, help="synthetic cluster scale")
    p.add_argument("--seed", type=int, help="RNG seed (datasets and centers)")
    p.add_argument("--config", help="key-value config file (flags override)")


def _add_run_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--algorithm", help="|".join(ALGORITHMS))
    p.add_argument("--ranks", type=int, help="simulated rank count")
    p.add_argument("--cells", type=int, help="landmark cell count (default 8*ranks)")
    p.add_argument("--leaf-size", dest="leaf_size", type=int)
    p.add_argument("--centers", choices=("random", "greedy"),
                   help="landmark center selection strategy")
    p.add_argument("--trace", help="write a JSON-lines message trace here")


_DEFAULTS = {"dataset": "synth:uniform-cube", "metric": "euclidean",
             "n": 1000, "dim": 8, "clusters": 10, "scale": 0.02, "seed": 0,
             "algorithm": "systolic-ring", "ranks": 1, "cells": None,
             "leaf_size": 10, "centers": "random", "trace": None}


def _settings(args, keys) -> dict:
    """Merge defaults, config file, and explicit flags (strongest last)."""
    merged = {k: _DEFAULTS[k] for k in keys if k in _DEFAULTS}
    if getattr(args, "config", None):
        cfg = dataio.parse_config(args.config)
        merged.update({k: v for k, v in cfg.items() if k in keys})
    for k in keys:
        v = getattr(args, k, None)
        if v is not None:
            merged[k] = v
    return merged


def _run_algorithm(name, pts, metric, eps, settings, trace=None):
    """One full construction run; returns (graph, report dict)."""
    if name not in ALGORITHMS:
        raise ParseError(f"unknown algorithm {name!r} (have {ALGORITHMS})")
    t0 = time.perf_counter()
    with Communicator(settings["ranks"], trace_path=trace) as comm:
        if name == "systolic-ring":
            g = run_systolic(pts, metric, eps, comm, settings["leaf_size"])
        else:
            g = run_landmark(
                pts, metric, eps, comm, cells=settings["cells"],
                leaf_size=settings["leaf_size"], strategy=settings["centers"],
                seed=settings["seed"],
                ghost="collective" if name == "landmark-coll" else "ring")
        wall = time.perf_counter() - t0
        st = graphmod.stats(g)
        report = {
            "algorithm": name, "metric": metric.kind, "eps": eps,
            "n": pts.n, "ranks": settings["ranks"],
            "cells": settings["cells"], "leaf_size": settings["leaf_size"],
            "seed": settings["seed"], "edges": st["edges"],
            "avg_degree": st["avg_degree"], "dist_evals": metric.eval_count,
            "wall_s": wall, "kernel_backend": backend_name(),
            "ranks_detail": comm.stats_dict(),
        }
    return g, report


def cmd_build(args) -> int:
    keys = ("dataset", "metric", "n", "dim", "clusters", "scale", "seed",
            "algorithm", "ranks", "cells", "leaf_size", "centers", "trace")
    s = _settings(args, keys)
    eps_list = args.epsilon if args.epsilon is not None else \
        _settings(args, ("epsilon",)).get("epsilon")
    if not eps_list:
        raise ParseError("build needs exactly one --epsilon value")
    if len(eps_list) != 1:
        raise ParseError("build takes a single epsilon; use bench for sweeps")
    eps = float(eps_list[0])
    pts = dataio.load_dataset(s["dataset"], s["metric"], n=s["n"], dim=s["dim"],
                              clusters=s["clusters"], seed=s["seed"],
                              scale=s["scale"])
    metric = make_metric(s["metric"])
    g, report = _run_algorithm(s["algorithm"], pts, metric, eps, s,
                               trace=s["trace"])
    graphmod.write_edge_list(g, args.out)
    print(f"wrote {args.out}: n={g.n} edges={g.m} "
          f"avg_degree={report['avg_degree']:.2f} "
          f"dist_evals={report['dist_evals']} wall={report['wall_s']:.3f}s")
    for r in report["ranks_detail"]:
        phases = " ".join(f"{k}={v:.3f}s" for k, v in
                          sorted(r["phase_seconds"].items()))
        print(f"  rank {r['rank']}: bytes_sent={r['bytes_sent']} "
              f"msgs={r['messages_sent']} {phases}")
    if args.stats:
        with open(args.stats, "w") as f:
            json.dump(report, f, indent=2)
    return EXIT_OK


def cmd_verify(args) -> int:
    keys = ("dataset", "metric", "n", "dim", "clusters", "scale", "seed")
    s = _settings(args, keys)
    got = graphmod.read_edge_list(args.graph)
    eps = float(args.epsilon[0]) if args.epsilon else got.eps
    if got.eps != eps:
        print(f"FAIL: graph header epsilon {got.eps!r} != requested {eps!r}")
        return EXIT_VERIFY
    if got.metric_kind != s["metric"]:
        print(f"FAIL: graph header metric {got.metric_kind!r} != "
              f"requested {s['metric']!r}")
        return EXIT_VERIFY
    pts = dataio.load_dataset(s["dataset"], s["metric"], n=s["n"], dim=s["dim"],
                              clusters=s["clusters"], seed=s["seed"],
                              scale=s["scale"])
    metric = make_metric(s["metric"])
    want = brute_graph(pts, metric, eps)
    ok, why = graphmod.equals_canonical(got, want)
    if ok:
        print(f"PASS: {args.graph} matches the brute-force graph "
              f"({want.m} edges)")
        return EXIT_OK
    print(f"FAIL: {why}")
    return EXIT_VERIFY


def cmd_bench(args) -> int:
    keys = ("dataset", "metric", "n", "dim", "clusters", "scale", "seed",
            "cells", "leaf_size", "centers")
    s = _settings(args, keys)
    eps_list = args.epsilon if args.epsilon is not None else \
        _settings(args, ("epsilon",)).get("epsilon", [])
    algorithms = args.algorithm or [_DEFAULTS["algorithm"]]
    ranks_list = args.ranks or [_DEFAULTS["ranks"]]
    rows = []
    for eps in eps_list:
        pts = dataio.load_dataset(s["dataset"], s["metric"], n=s["n"],
                                  dim=s["dim"], clusters=s["clusters"],
                                  seed=s["seed"], scale=s["scale"])
        for name in algorithms:
            for nr in ranks_list:
                metric = make_metric(s["metric"])
                run_s = dict(s, ranks=nr)
                _, rep = _run_algorithm(name, pts, metric, float(eps), run_s)
                phases: dict = {}
                bytes_sent = 0
                for r in rep["ranks_detail"]:
                    bytes_sent += r["bytes_sent"]
                    for k, v in r["phase_seconds"].items():
                        phases[k] = phases.get(k, 0.0) + v
                rows.append({
                    "dataset": s["dataset"], "metric": s["metric"],
                    "algorithm": name, "eps": float(eps), "ranks": nr,
                    "cells": rep["cells"], "leaf_size": rep["leaf_size"],
                    "seed": rep["seed"], "n": rep["n"],
                    "edges": rep["edges"], "avg_degree": rep["avg_degree"],
                    "dist_evals": rep["dist_evals"],
                    "bytes_sent": bytes_sent, "wall_s": rep["wall_s"],
                    **{f"{k}_s": v for k, v in sorted(phases.items())},
                })
    fields = ["dataset", "metric", "algorithm", "eps", "ranks", "cells",
              "leaf_size", "seed", "n", "edges", "avg_degree", "dist_evals",
              "bytes_sent", "wall_s"]
    extra = sorted({k for r in rows for k in r} - set(fields))
    fields += extra
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        if args.format == "json":
            json.dump(rows, out, indent=2)
            out.write("\n")
        else:
            w = csv.DictWriter(out, fieldnames=fields, restval="")
            w.writeheader()
            for r in rows:
                w.writerow(r)
    finally:
        if args.out:
            out.close()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="epsgraph",
        description="Exact fixed-radius near-neighbor graph construction "
                    "in general metric spaces.")
    sub = ap.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="construct a graph and write an edge list")
    _add_dataset_args(b)
    _add_run_args(b)
    b.add_argument("--epsilon", type=float, nargs="+", help="radius threshold")
    b.add_argument("--out", required=True, help="edge-list output path")
    b.add_argument("--stats", help="write a JSON run report here")
    b.set_defaults(fn=cmd_build)

    v = sub.add_parser("verify", help="compare an edge list to the brute-force graph")
    _add_dataset_args(v)
    v.add_argument("--epsilon", type=float, nargs=1,
                   help="expected threshold (default: file header)")
    v.add_argument("graph", help="edge-list file to check")
    v.set_defaults(fn=cmd_verify)

    n = sub.add_parser("bench", help="run a config matrix, emit CSV/JSON rows")
    _add_dataset_args(n)
    n.add_argument("--epsilon", type=float, nargs="*", help="threshold sweep")
    n.add_argument("--algorithm", nargs="*", choices=ALGORITHMS)
    n.add_argument("--ranks", type=int, nargs="*")
    n.add_argument("--cells", type=int)
    n.add_argument("--leaf-size", dest="leaf_size", type=int)
    n.add_argument("--centers", choices=("random", "greedy"))
    n.add_argument("--out", help="output path (default stdout)")
    n.add_argument("--format", choices=("csv", "json"), default="csv")
    n.set_defaults(fn=cmd_bench)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ParseError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA
    except (EpsGraphError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA
    except Exception as e:  # pragma: no cover - unexpected bug surface
        print(f"internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
