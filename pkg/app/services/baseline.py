import numpy as np
from scipy import linalg

from app.core.errors import InputError
from app.netdata.netdata_validator import ObservationMask, ObservedNetwork
from app.services.estep import observed_matrix


def svd_imputation_scores(
    net: ObservedNetwork, train: ObservationMask, rank: int = 3
) -> np.ndarray:
    """
    Rank-k truncated SVD of Y with every unobserved entry replaced by the
    mean training value. Returns the n x n reconstruction used as scores.
    """
    if rank < 1:
        raise InputError(f"rank must be positive, got {rank}")

    observed = observed_matrix(net, train)
    Y = net.adjacency.astype(float)
    fill = Y[observed].mean() if observed.any() else 0.0
    filled = np.where(observed, Y, fill)

    left, sing, right = linalg.svd(filled)
    k = min(rank, sing.size)
    return (left[:, :k] * sing[:k]) @ right[:k]
