import numpy as np
import pytest

from graphdebias import AttributedNetwork


def k2_network(values=(0.0, 1.0)) -> AttributedNetwork:
    """Two connected nodes, one per group, one attribute dimension."""
    adjacency = np.array([[0.0, 1.0], [1.0, 0.0]])
    attributes = np.array([[values[0]], [values[1]]])
    return AttributedNetwork(adjacency, attributes, np.array([0, 1]))


def random_network(rng, n=20, m=3, p=0.2, groups=2, min_degree_one=False) -> AttributedNetwork:
    upper = np.triu(rng.random((n, n)) < p, k=1)
    adjacency = (upper | upper.T).astype(float)
    if min_degree_one:
        # degree-0 nodes sit outside the spectral-reconstruction identity;
        # wire each isolated node to a random neighbor
        for i in np.flatnonzero(adjacency.sum(axis=1) == 0):
            j = int(rng.integers(n - 1))
            j += j >= i
            adjacency[i, j] = adjacency[j, i] = 1.0
    attributes = rng.normal(size=(n, m))
    sensitive = np.arange(n) % groups
    return AttributedNetwork(adjacency, attributes, sensitive)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
