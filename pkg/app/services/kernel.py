"""
Isotropic RBF covariance over membership vectors, its partial derivatives
and the eigen-representation used by the Kronecker shortcut.
"""
from typing import Any, Dict, Literal, Optional

import numpy as np
from scipy import linalg
from scipy.sparse.linalg import ArpackNoConvergence, eigsh
from scipy.spatial.distance import pdist, squareform

from app.core.errors import InputError, NumericError
from app.core.logging_utils import get_logger
from app.inference.inference_validator import KernelParams, SpectralCache

logger = get_logger(__name__)

# eigenvalues below this fraction of the largest one are numerical noise
EIGEN_CLAMP_RTOL = 1e-12


def rbf_matrix(U: np.ndarray, params: KernelParams) -> np.ndarray:
    """
    K_ij = exp(-gamma * ||u_i - u_j||^2) for the columns of U, with
    1 + jitter on the diagonal.
    """
    U = np.asarray(U, dtype=float)
    if not np.all(np.isfinite(U)):
        raise InputError("membership matrix has non-finite entries")

    n = U.shape[1]
    if n == 1:
        return np.array([[1.0 + params.jitter]])

    sq_dists = squareform(pdist(U.T, metric="sqeuclidean"))
    K = np.exp(-params.gamma * sq_dists)
    K[np.diag_indices(n)] = 1.0 + params.jitter
    return K


def rbf_partial(
    U: np.ndarray,
    params: KernelParams,
    i: int,
    r: int,
    K: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    Row i of dK/du_ir. The full derivative is the symmetric matrix whose
    row i and column i equal the returned vector g, zero elsewhere; g_i = 0.
    """
    d, n = U.shape
    if not (0 <= i < n and 0 <= r < d):
        raise InputError(f"index (i={i}, r={r}) out of range for U of shape {U.shape}")
    if K is None:
        K = rbf_matrix(U, params)

    g = -2.0 * params.gamma * (U[r, i] - U[r, :]) * K[i, :]
    g[i] = 0.0
    return g


def shrinkage_matrix(eigenvalues: np.ndarray) -> np.ndarray:
    prod = np.outer(eigenvalues, eigenvalues)
    return prod / (1.0 + prod)


def kernel_condition_diagnostics(K: np.ndarray) -> Dict[str, Any]:
    K = np.asarray(K, dtype=float)
    diagnostics: Dict[str, Any] = {
        "n": K.shape[0],
        "finite": bool(np.all(np.isfinite(K))),
    }
    if not diagnostics["finite"]:
        return diagnostics

    diagnostics["asymmetry"] = float(np.max(np.abs(K - K.T)))
    diagnostics["diag_min"] = float(np.min(np.diag(K)))
    diagnostics["diag_max"] = float(np.max(np.diag(K)))
    try:
        diagnostics["condition"] = float(np.linalg.cond(K))
    except np.linalg.LinAlgError:
        diagnostics["condition"] = float("inf")
    return diagnostics


def _dense_eigenpairs(K: np.ndarray, m: int):
    n = K.shape[0]
    if m == n:
        w, V = linalg.eigh(K)
    else:
        w, V = linalg.eigh(K, subset_by_index=[n - m, n - 1])
    return w, V


def _lanczos_eigenpairs(K: np.ndarray, m: int):
    # fixed start vector keeps the iteration deterministic
    v0 = np.ones(K.shape[0])
    return eigsh(K, k=m, which="LA", v0=v0)


def spectral_decompose(
    K: np.ndarray,
    rank: Optional[int] = None,
    method: Literal["dense", "lanczos"] = "dense",
) -> SpectralCache:
    """
    Keep the m largest eigenpairs of K (all of them when rank is None),
    clamp negative eigenvalues to zero and build D.
    """
    K = np.asarray(K, dtype=float)
    n = K.shape[0]
    m = n if rank is None else int(rank)
    if not (1 <= m <= n):
        raise InputError(f"rank must be in [1, {n}], got {rank}")

    try:
        if method == "lanczos" and m < n - 1:
            w, V = _lanczos_eigenpairs(K, m)
        else:
            w, V = _dense_eigenpairs(K, m)
    except (linalg.LinAlgError, ArpackNoConvergence, ValueError) as e:
        raise NumericError(
            f"eigendecomposition failed: {e}", kernel_condition_diagnostics(K)
        )

    order = np.argsort(w)[::-1]
    w = w[order]
    V = V[:, order]

    lam_max = max(float(w[0]), 0.0)
    negative = w < 0
    if np.any(w < -EIGEN_CLAMP_RTOL * lam_max):
        logger.warning(
            f"Clamping {int(negative.sum())} negative eigenvalues "
            f"(min {float(w.min()):.3e}) of a kernel expected to be PSD"
        )
    w = np.where(negative, 0.0, w)

    return SpectralCache(V=V, eigenvalues=w, D=shrinkage_matrix(w))
