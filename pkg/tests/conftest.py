import numpy as np
import pytest

from app.inference.inference_validator import KernelParams
from app.netdata.netdata_service import holdout_split
from app.netdata.netdata_validator import ObservedNetwork, SideInfo
from app.services.kernel import rbf_matrix, spectral_decompose


def random_network(n: int, seed: int, density: float = 0.4, directed: bool = True) -> ObservedNetwork:
    rng = np.random.default_rng(seed)
    A = (rng.random((n, n)) < density).astype(np.int8)
    if not directed:
        A = np.triu(A)
        A = A | A.T
    return ObservedNetwork(n=n, adjacency=A, directed=directed)


def random_cache(n: int, d: int, seed: int, gamma: float = 1.0):
    rng = np.random.default_rng(seed)
    U = rng.normal(0.0, 1.0, size=(d, n))
    params = KernelParams(gamma=gamma)
    K = rbf_matrix(U, params)
    return U, K, spectral_decompose(K)


@pytest.fixture
def small_problem():
    """n=10 directed network with an 80/20 split and two side features."""
    net = random_network(10, seed=3)
    train, test = holdout_split(net, 0.8, seed=3)
    rng = np.random.default_rng(3)
    side = SideInfo(features=rng.normal(size=(10, 10, 2)))
    return net, train, test, side
