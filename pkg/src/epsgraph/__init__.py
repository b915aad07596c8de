"""Exact fixed-radius near-neighbor graphs in general metric spaces.

Batch-built cover trees answer exact range queries under euclidean,
cosine, hamming, and edit distances; three construction pipelines
(systolic ring, landmark with collective ghost exchange, landmark with
ring ghost queries) run over a deterministic simulated multi-rank
communicator and are verifiable against a brute-force oracle.

Hot distance kernels live in a compiled extension with a pure-Python
fallback selected at import (see ``epsgraph._kernels``).
"""

from ._kernels import backend_name
from .comm import Communicator
from .covertree import (CoverTree, batch_range_query, build_tree,
                        check_invariants, range_query, split_vertex)
from .graph import NeighborGraph, assemble, equals_canonical, stats
from .io import gen_synthetic, load_bvecs, load_csv, load_fvecs, load_ivecs
from .landmark import (assign_cells, build_voronoi, collective_ghost_queries,
                       ghost_sets, ring_ghost_queries, run_landmark,
                       select_centers)
from .metric import (Metric, PointSet, make_metric,
                     measure_expansion_constant, pairwise_max_distance)
from .oracle import brute_graph, optimal_partition
from .systolic import run_systolic

__version__ = "0.1.0"

__all__ = [
    "backend_name", "Communicator", "CoverTree", "batch_range_query",
    "build_tree", "check_invariants", "range_query", "split_vertex",
    "NeighborGraph", "assemble", "equals_canonical", "stats",
    "gen_synthetic", "load_bvecs", "load_csv", "load_fvecs", "load_ivecs",
    "assign_cells", "build_voronoi", "collective_ghost_queries",
    "ghost_sets", "ring_ghost_queries", "run_landmark", "select_centers",
    "Metric", "PointSet", "make_metric", "measure_expansion_constant",
    "pairwise_max_distance", "brute_graph", "optimal_partition",
    "run_systolic", "__version__",
]
