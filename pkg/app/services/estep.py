"""
Variational E-step: closed-form coordinate updates of q(Z), q(M), q(beta)
for a fixed membership matrix, plus the evidence lower bound.
"""
from typing import List, Tuple

import numpy as np
from pydantic import BaseModel
from scipy import linalg

from app.core.errors import NumericError
from app.core.logging_utils import get_logger
from app.inference.inference_validator import SpectralCache, VariationalState
from app.netdata.netdata_validator import ObservationMask, ObservedNetwork, SideInfo
from app.services.truncnorm import (
    expected_z,
    truncated_entropy_excess,
    truncated_variance,
)

logger = get_logger(__name__)


class EstepResult(BaseModel):
    state: VariationalState
    sweeps: int
    converged: bool
    elbo_trace: List[float] = []

    class Config:
        arbitrary_types_allowed = True


def observed_matrix(net: ObservedNetwork, train: ObservationMask) -> np.ndarray:
    observed = train.to_matrix()
    if not net.include_diagonal:
        np.fill_diagonal(observed, False)
    return observed


def side_mean(side: SideInfo, beta_mean: np.ndarray) -> np.ndarray:
    """P with entries beta^T r_ij; all zeros without side information."""
    if side.p == 0:
        return np.zeros((side.n, side.n))
    return side.features @ beta_mean


def initial_state(
    net: ObservedNetwork,
    train: ObservationMask,
    side: SideInfo,
    sigma_beta_sq: float,
) -> VariationalState:
    """M = 0, beta = 0, Sigma_beta = sigma_beta^2 I, every q(z_ij) located at 0."""
    n, p = net.n, side.p
    zeros = np.zeros((n, n))
    Z_mean = expected_z(zeros, net.adjacency, observed_matrix(net, train))
    return VariationalState(
        M_mean=zeros.copy(),
        Z_mean=np.asarray(Z_mean, dtype=float),
        Z_loc=zeros.copy(),
        beta_mean=np.zeros(p),
        beta_cov=sigma_beta_sq * np.eye(p),
        P_mean=zeros.copy(),
    )


def update_Z(
    state: VariationalState, net: ObservedNetwork, train: ObservationMask
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Relocate every q(z_ij) at <x_ij> = <m_ij> + <p_ij>. Returns the new
    (Z_mean, Z_loc); observed entries get the truncated-normal mean.
    """
    x_mean = state.M_mean + state.P_mean
    Z_mean = expected_z(x_mean, net.adjacency, observed_matrix(net, train))
    return np.asarray(Z_mean, dtype=float), x_mean


def update_M(cache: SpectralCache, Z_mean: np.ndarray, P_mean: np.ndarray) -> np.ndarray:
    """<M> = V [ (V^T (Z - P) V) o D ] V^T."""
    V = cache.V
    coeffs = V.T @ (Z_mean - P_mean) @ V
    return V @ (coeffs * cache.D) @ V.T


def update_beta(
    side: SideInfo,
    Z_mean: np.ndarray,
    M_mean: np.ndarray,
    sigma_beta_sq: float,
    net: ObservedNetwork,
    train: ObservationMask,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Ridge-type posterior of beta over the modeled training pairs:
    Sigma = (sum r r^T + I / sigma^2)^-1, mean = Sigma sum (z - m) r.
    """
    p = side.p
    if p == 0:
        return np.zeros(0), np.zeros((0, 0))

    observed = observed_matrix(net, train)
    R = side.features[observed]
    resid = (Z_mean - M_mean)[observed]

    precision = R.T @ R + np.eye(p) / sigma_beta_sq
    try:
        factor = linalg.cho_factor(precision)
    except linalg.LinAlgError as e:
        raise NumericError(f"beta normal equations are singular: {e}")

    beta_cov = linalg.cho_solve(factor, np.eye(p))
    beta_mean = linalg.cho_solve(factor, R.T @ resid)
    return beta_mean, 0.5 * (beta_cov + beta_cov.T)


def posterior_m_variance(cache: SpectralCache) -> np.ndarray:
    """Var_q(m_ij) = [(V o V) D (V o V)^T]_ij."""
    W = cache.V ** 2
    return W @ cache.D @ W.T


def elbo(
    state: VariationalState,
    cache: SpectralCache,
    net: ObservedNetwork,
    train: ObservationMask,
    side: SideInfo,
    sigma_beta_sq: float,
) -> float:
    """
    Evidence lower bound of the model given U, up to additive constants
    that are the same for every call with the same shapes.
    """
    observed = observed_matrix(net, train)
    s = 2.0 * net.adjacency - 1.0

    var_x = posterior_m_variance(cache)
    if side.p > 0:
        var_x_obs = var_x + np.einsum(
            "ijk,kl,ijl->ij", side.features, state.beta_cov, side.features
        )
    else:
        var_x_obs = var_x

    resid_sq = (state.Z_mean - state.M_mean - state.P_mean) ** 2

    # q(Z) together with E[log p(z | x)]
    t = s * state.Z_loc
    obs_terms = (
        -0.5 * (truncated_variance(t) + resid_sq + var_x_obs)
        + truncated_entropy_excess(t)
    )
    unobs_terms = -0.5 * (1.0 + resid_sq + var_x)
    total = float(np.sum(np.where(observed, obs_terms, unobs_terms)))

    # q(beta) against its normal prior
    p = side.p
    if p > 0:
        _, logdet_cov = np.linalg.slogdet(state.beta_cov)
        total += (
            -(state.beta_mean @ state.beta_mean + np.trace(state.beta_cov))
            / (2.0 * sigma_beta_sq)
            - 0.5 * p * np.log(sigma_beta_sq)
            + 0.5 * logdet_cov
        )

    # q(M) against the matrix-variate prior, in the cache's eigenbasis
    lam_prod = np.outer(cache.eigenvalues, cache.eigenvalues)
    keep = lam_prod > 0
    coeffs = cache.V.T @ state.M_mean @ cache.V
    prior = -0.5 * np.log(lam_prod[keep]) - (
        coeffs[keep] ** 2 + cache.D[keep]
    ) / (2.0 * lam_prod[keep])
    entropy = 0.5 * np.log(cache.D[keep])
    total += float(np.sum(prior) + np.sum(entropy))

    return total


def _check_finite(name: str, *arrays: np.ndarray) -> None:
    for arr in arrays:
        if not np.all(np.isfinite(arr)):
            raise NumericError(f"non-finite value produced by {name}")


def run_estep(
    state: VariationalState,
    cache: SpectralCache,
    net: ObservedNetwork,
    train: ObservationMask,
    side: SideInfo,
    sigma_beta_sq: float,
    tol_e: float = 1e-6,
    max_e: int = 200,
    track_elbo: bool = False,
) -> EstepResult:
    """
    Sweep update_Z -> update_M -> update_beta until the largest change of
    <M> over a sweep drops below tol_e or max_e sweeps have run. With
    track_elbo the bound is recorded after every coordinate update.
    """
    state = state.copy()
    observed = observed_matrix(net, train)
    trace: List[float] = []

    def record():
        if track_elbo:
            trace.append(elbo(state, cache, net, train, side, sigma_beta_sq))

    record()
    converged = False
    sweeps = 0
    for sweeps in range(1, max_e + 1):
        M_prev = state.M_mean

        state.Z_mean, state.Z_loc = update_Z(state, net, train)
        _check_finite("update_Z", state.Z_mean)
        record()

        state.M_mean = update_M(cache, state.Z_mean, state.P_mean)
        _check_finite("update_M", state.M_mean)
        record()

        if side.p > 0:
            state.beta_mean, state.beta_cov = update_beta(
                side, state.Z_mean, state.M_mean, sigma_beta_sq, net, train
            )
            P_new = side_mean(side, state.beta_mean)
            # unobserved z's follow P so that <z> = <x> keeps holding
            state.Z_mean = np.where(
                observed, state.Z_mean, state.Z_mean + P_new - state.P_mean
            )
            state.Z_loc = np.where(
                observed, state.Z_loc, state.Z_loc + P_new - state.P_mean
            )
            state.P_mean = P_new
            _check_finite("update_beta", state.beta_mean, state.P_mean)
            record()

        delta = float(np.max(np.abs(state.M_mean - M_prev)))
        if delta < tol_e:
            converged = True
            break

    logger.debug(
        f"E-step finished after {sweeps} sweeps (converged={converged}, last change={delta:.3e})"
    )
    return EstepResult(state=state, sweeps=sweeps, converged=converged, elbo_trace=trace)
