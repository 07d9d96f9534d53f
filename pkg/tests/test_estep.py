import numpy as np
import pytest

from app.inference.inference_validator import KernelParams
from app.netdata.netdata_service import holdout_split
from app.netdata.netdata_validator import ObservationMask, SideInfo
from app.services.estep import (
    elbo,
    initial_state,
    posterior_m_variance,
    run_estep,
    update_beta,
    update_M,
)
from app.services.kernel import rbf_matrix, spectral_decompose
from tests.conftest import random_cache, random_network


def dense_sigma_m(K: np.ndarray) -> np.ndarray:
    KK = np.kron(K, K)
    return KK @ np.linalg.inv(np.eye(KK.shape[0]) + KK)


@pytest.mark.parametrize("n", range(2, 9))
@pytest.mark.parametrize("d", [1, 2, 3])
def test_update_m_matches_dense_kronecker(n, d):
    for trial in range(20):
        seed = 1000 * n + 100 * d + trial
        _, K, cache = random_cache(n, d, seed)
        rng = np.random.default_rng(seed)
        Z = rng.normal(size=(n, n))
        P = rng.normal(size=(n, n))

        got = update_M(cache, Z, P)
        want = (dense_sigma_m(K) @ (Z - P).ravel()).reshape(n, n)
        assert np.max(np.abs(got - want)) < 1e-8


def test_update_m_is_linear():
    _, _, cache = random_cache(6, 2, seed=0)
    rng = np.random.default_rng(0)
    Z1, Z2 = rng.normal(size=(2, 6, 6))
    zero = np.zeros((6, 6))
    combo = update_M(cache, 2.0 * Z1 - 3.0 * Z2, zero)
    assert np.allclose(combo, 2.0 * update_M(cache, Z1, zero) - 3.0 * update_M(cache, Z2, zero))
    assert np.allclose(update_M(cache, zero, zero), 0.0)


def test_update_m_shrinks_residual():
    _, _, cache = random_cache(7, 3, seed=1)
    R = np.random.default_rng(1).normal(size=(7, 7))
    assert np.linalg.norm(update_M(cache, R, np.zeros_like(R))) <= np.linalg.norm(R)


def test_posterior_variance_matches_dense_diagonal():
    _, K, cache = random_cache(5, 2, seed=2)
    want = np.diag(dense_sigma_m(K)).reshape(5, 5)
    assert np.allclose(posterior_m_variance(cache), want, atol=1e-10)


def test_update_beta_matches_ridge_solution(small_problem):
    net, train, _, side = small_problem
    rng = np.random.default_rng(5)
    Z = rng.normal(size=(10, 10))
    M = rng.normal(size=(10, 10))

    mean, cov = update_beta(side, Z, M, 2.0, net, train)

    R = side.features[train.pairs[:, 0], train.pairs[:, 1]]
    resid = (Z - M)[train.pairs[:, 0], train.pairs[:, 1]]
    want_cov = np.linalg.inv(R.T @ R + np.eye(2) / 2.0)
    assert np.allclose(cov, want_cov)
    assert np.allclose(mean, want_cov @ R.T @ resid)


def test_update_beta_without_side_information(small_problem):
    net, train, _, _ = small_problem
    mean, cov = update_beta(
        SideInfo.empty(10), np.zeros((10, 10)), np.zeros((10, 10)), 1.0, net, train
    )
    assert mean.shape == (0,)
    assert cov.shape == (0, 0)


def test_update_beta_skips_unmodeled_self_pairs():
    net = random_network(6, seed=4)
    i, j = np.indices((6, 6))
    everything = ObservationMask(n=6, pairs=np.column_stack([i.ravel(), j.ravel()]))
    rng = np.random.default_rng(4)
    side = SideInfo(features=rng.normal(size=(6, 6, 2)))
    Z = rng.normal(size=(6, 6))
    M = rng.normal(size=(6, 6))

    mean, cov = update_beta(side, Z, M, 1.0, net, everything)

    off = ~np.eye(6, dtype=bool)
    R = side.features[off]
    want_cov = np.linalg.inv(R.T @ R + np.eye(2))
    assert np.allclose(cov, want_cov)
    assert np.allclose(mean, want_cov @ R.T @ (Z - M)[off])


def _monotone(trace, rel=1e-9, slack=1e-6):
    for before, after in zip(trace, trace[1:]):
        assert after >= before - max(slack, rel * abs(before))


@pytest.mark.parametrize("seed", range(20))
def test_estep_converges_and_elbo_is_monotone(seed):
    net = random_network(10, seed=seed)
    train, _ = holdout_split(net, 0.8, seed=seed)
    rng = np.random.default_rng(seed)
    side = SideInfo(features=rng.normal(size=(10, 10, 2)))
    U = rng.normal(size=(2, 10))
    cache = spectral_decompose(rbf_matrix(U, KernelParams(gamma=1.0)))

    state = initial_state(net, train, side, 1.0)
    result = run_estep(state, cache, net, train, side, 1.0, max_e=200, track_elbo=True)

    assert result.converged
    assert result.sweeps <= 200
    _monotone(result.elbo_trace)


def test_estep_without_side_information_is_monotone():
    net = random_network(8, seed=42, directed=False)
    train, _ = holdout_split(net, 0.7, seed=42)
    side = SideInfo.empty(8)
    _, _, cache = random_cache(8, 3, seed=42)

    state = initial_state(net, train, side, 1.0)
    result = run_estep(state, cache, net, train, side, 1.0, track_elbo=True)
    assert result.converged
    _monotone(result.elbo_trace)
    assert result.elbo_trace[-1] == pytest.approx(
        elbo(result.state, cache, net, train, side, 1.0)
    )


def test_estep_leaves_input_state_untouched(small_problem):
    net, train, _, side = small_problem
    _, _, cache = random_cache(10, 2, seed=9)
    state = initial_state(net, train, side, 1.0)
    before = state.M_mean.copy()
    run_estep(state, cache, net, train, side, 1.0, max_e=3)
    assert np.array_equal(state.M_mean, before)


def test_initial_state_shapes(small_problem):
    net, train, _, side = small_problem
    state = initial_state(net, train, side, 2.5)
    assert np.all(state.M_mean == 0)
    assert np.allclose(state.beta_cov, 2.5 * np.eye(2))
    observed = train.to_matrix()
    y = net.adjacency
    # q(z) located at zero: +/- sqrt(2/pi) on observed pairs, 0 elsewhere
    assert np.allclose(state.Z_mean[observed & (y == 1)], np.sqrt(2 / np.pi))
    assert np.allclose(state.Z_mean[observed & (y == 0)], -np.sqrt(2 / np.pi))
    assert np.all(state.Z_mean[~observed] == 0)
