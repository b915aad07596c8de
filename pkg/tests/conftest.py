import numpy as np
import pytest

from epsgraph.io import gen_synthetic
from epsgraph.metric import PointSet, make_metric


@pytest.fixture
def rng():
    return np.random.default_rng(20240901)


def dataset_for(kind: str, n: int = 300, seed: int = 0) -> PointSet:
    """Small dataset matching a metric kind."""
    if kind in ("euclidean", "cosine"):
        return gen_synthetic("uniform-cube", n, 6, seed=seed)
    if kind == "hamming":
        return gen_synthetic("bit-uniform", n, 96, seed=seed)
    return gen_synthetic("random-strings", n, seed=seed)


def fresh(kind: str):
    return make_metric(kind)
