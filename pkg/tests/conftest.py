import pathlib

import numpy as np
import pytest

from fairfl.dataio import SensitiveDistribution, TabularDataset

REPO = pathlib.Path(__file__).resolve().parent.parent
DATA_CSV = REPO / "data" / "census5k.csv"
DATA_SCHEMA = REPO / "data" / "census5k.schema"


@pytest.fixture(scope="session")
def census_paths():
    return DATA_CSV, DATA_SCHEMA


def make_dist(s: np.ndarray, k: int) -> SensitiveDistribution:
    """Sensitive distribution straight from an attribute vector."""
    probs = np.bincount(np.asarray(s, dtype=int), minlength=k) / len(s)
    return SensitiveDistribution(probs=probs, inv_sqrt=np.diag(probs**-0.5), rho=float(probs.min()))


def random_dataset(rng, n=50, d=4, k=2, l=2, scale=1.0) -> TabularDataset:
    """Small dataset with every sensitive/label class present."""
    while True:
        s = rng.integers(0, k, size=n)
        y = rng.integers(0, l, size=n)
        if len(np.unique(s)) == k and len(np.unique(y)) == l:
            break
    return TabularDataset(rng.normal(scale=scale, size=(n, d)), y, s, k=k, l=l)
