import math

import numpy as np
import pytest


def series_bessel_i(nu, x, terms=60):
    """Power-series I_nu(x), summed term by term in floating point."""
    total = 0.0
    for k in range(terms):
        total += math.exp((2 * k + nu) * math.log(x / 2.0) - math.lgamma(k + 1) - math.lgamma(k + nu + 1))
    return total


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_oblique(rng, d, n):
    X = rng.standard_normal((d, n))
    return X / np.linalg.norm(X, axis=0)


@pytest.fixture
def fixtures():
    import json
    from pathlib import Path

    root = Path(__file__).parent / "fixtures"

    def load(name):
        return json.loads((root / name).read_text())

    return load
