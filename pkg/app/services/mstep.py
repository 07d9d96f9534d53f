"""
M-step: maximize the expected log prior of <M> under K(U) minus an L1
penalty on U. The Kronecker trace term is evaluated through the frozen
E-step eigenbasis, so nothing larger than n x n is ever formed.
"""
from typing import Tuple

import numpy as np
from scipy import linalg

from app.core.errors import NumericError
from app.core.logging_utils import get_logger
from app.inference.inference_validator import MstepProblem, MstepResult
from app.services.kernel import kernel_condition_diagnostics, rbf_matrix
from app.services.l1_lbfgs import maximize_l1

logger = get_logger(__name__)

# gradient-norm stop, scaled by sqrt(d * n)
MSTEP_GTOL = 1e-5


def _cholesky(K: np.ndarray):
    try:
        return linalg.cho_factor(K, lower=True)
    except linalg.LinAlgError as e:
        raise NumericError(
            f"Cholesky factorization of K failed ({e}); try a larger jitter",
            kernel_condition_diagnostics(K),
        )


def _contract_with_partials(U: np.ndarray, gamma: float, K: np.ndarray, S: np.ndarray) -> np.ndarray:
    """
    For symmetric S, entry (r, i) of the result is tr(S dK/du_ir) / 2, i.e.
    sum_j S_ij g_j with g the sparse row of dK/du_ir. All (r, i) at once.
    """
    H = S * K
    return -2.0 * gamma * (U * H.sum(axis=1)[None, :] - U @ H)


def objective_and_gradient(U: np.ndarray, prob: MstepProblem) -> Tuple[float, np.ndarray]:
    """
    f(U) = -n log det K - 1/2 tr(K^-1 M K^-1 M^T) - 1/2 a^T D a,
    a = diag(V^T K^-1 V), and its gradient with respect to U (d x n).
    """
    U = np.asarray(U, dtype=float)
    n = U.shape[1]
    gamma = prob.kernel_params.gamma
    V, D = prob.cache.V, prob.cache.D
    M = prob.M_mean

    K = rbf_matrix(U, prob.kernel_params)
    factor = _cholesky(K)
    logdet = 2.0 * float(np.sum(np.log(np.diag(factor[0]))))
    K_inv = linalg.cho_solve(factor, np.eye(n))
    K_inv = 0.5 * (K_inv + K_inv.T)

    A1 = K_inv @ M
    A2 = K_inv @ M.T
    trace_term = float(np.sum(A1 * A2.T))

    W = K_inv @ V
    a = np.sum(V * W, axis=0)
    Da = D @ a
    kron_term = float(a @ Da)

    value = -n * logdet - 0.5 * trace_term - 0.5 * kron_term
    if not np.isfinite(value):
        raise NumericError("M-step objective is not finite", kernel_condition_diagnostics(K))

    B = (A1 @ A2 + A2 @ A1) @ K_inv
    B = 0.5 * (B + B.T)
    S3 = (W * Da) @ W.T
    S = -2.0 * n * K_inv + B + 2.0 * S3

    grad = _contract_with_partials(U, gamma, K, S)
    return value, grad


def smooth_objective(U: np.ndarray, prob: MstepProblem) -> float:
    return objective_and_gradient(U, prob)[0]


def smooth_gradient(U: np.ndarray, prob: MstepProblem) -> np.ndarray:
    return objective_and_gradient(U, prob)[1]


def penalized_objective(U: np.ndarray, prob: MstepProblem) -> float:
    return smooth_objective(U, prob) - prob.l1_strength * float(np.sum(np.abs(U)))


def optimize_memberships(U0: np.ndarray, prob: MstepProblem, max_iter: int = 100) -> MstepResult:
    """
    Run the L1-penalized quasi-Newton ascent from U0. The result never has
    a lower penalized objective than U0 (or than max(U0, 0) when the
    nonnegativity bound is active).
    """
    d, n = U0.shape
    result = maximize_l1(
        lambda U: objective_and_gradient(U, prob),
        U0,
        l1_strength=prob.l1_strength,
        nonnegative=prob.nonnegative,
        max_iter=max_iter,
        gtol=MSTEP_GTOL * np.sqrt(d * n),
    )
    logger.debug(
        f"M-step: {result.n_iter} iterations, penalized f={result.value:.6g}, "
        f"warnflag={result.warnflag}"
    )
    return MstepResult(
        U=result.x,
        penalized_value=result.value,
        n_iter=result.n_iter,
        warnflag=result.warnflag,
        message=result.message,
    )
