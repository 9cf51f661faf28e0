import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240117)


def mc_bound(x, true_value, n_se=3.0):
    """|sample mean - true| <= n_se * sample SE; returns (ok, zscore)."""
    x = np.asarray(x)
    se = x.std(ddof=1) / np.sqrt(x.size)
    z = abs(x.mean() - true_value) / se
    return z <= n_se, z
