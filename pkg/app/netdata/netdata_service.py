from typing import Tuple

import numpy as np

from app.core.errors import InputError
from app.core.logging_utils import get_logger
from app.netdata.netdata_validator import (
    GroundTruthMembership,
    ObservationMask,
    ObservedNetwork,
)

logger = get_logger(__name__)


def _round_half_up(x: float) -> int:
    return int(np.floor(x + 0.5))


def split_pairs(
    pairs: np.ndarray, n: int, mirrored: bool, train_fraction: float, seed: int
) -> Tuple[ObservationMask, ObservationMask]:
    """Uniformly random partition of an explicit pair list."""
    if not (0.0 < train_fraction <= 1.0):
        raise InputError(f"train_fraction must be in (0, 1], got {train_fraction}")
    if len(pairs) == 0:
        raise InputError("cannot split an empty index set")

    rng = np.random.default_rng(seed)
    order = rng.permutation(len(pairs))
    n_train = _round_half_up(train_fraction * len(pairs))

    train_idx = np.sort(order[:n_train])
    test_idx = np.sort(order[n_train:])
    return (
        ObservationMask(n=n, pairs=pairs[train_idx], mirrored=mirrored),
        ObservationMask(n=n, pairs=pairs[test_idx], mirrored=mirrored),
    )


def holdout_split(
    net: ObservedNetwork, train_fraction: float, seed: int
) -> Tuple[ObservationMask, ObservationMask]:
    """
    Partition the modeled index set into train/test masks. Undirected
    networks are split over canonical (i <= j) pairs and the masks mirror
    them, so a tie is never both train and test.
    """
    pairs = net.modeled_pairs()
    train, test = split_pairs(
        pairs, net.n, not net.directed, train_fraction, seed
    )
    logger.debug(
        f"Hold-out split seed={seed}: {len(train)} train / {len(test)} test pairs"
    )
    return train, test


def split_mask(
    mask: ObservationMask, train_fraction: float, seed: int
) -> Tuple[ObservationMask, ObservationMask]:
    """Carve an inner train/validation split out of an existing mask."""
    return split_pairs(mask.pairs, mask.n, mask.mirrored, train_fraction, seed)


def synth_cliques(
    num_cliques: int, clique_size: int, flip_rate: float, seed: int
) -> Tuple[ObservedNetwork, GroundTruthMembership]:
    """
    Block-diagonal clique network with round(flip_rate * n^2) entries
    toggled independently (no mirroring). Self-pairs are modeled and the
    result is treated as directed.
    """
    if num_cliques < 1 or clique_size < 1:
        raise InputError("num_cliques and clique_size must be at least 1")
    if not (0.0 <= flip_rate <= 1.0):
        raise InputError(f"flip_rate must be in [0, 1], got {flip_rate}")

    n = num_cliques * clique_size
    assignments = np.repeat(np.arange(num_cliques), clique_size)
    adjacency = (assignments[:, None] == assignments[None, :]).astype(np.int8)

    n_flips = _round_half_up(flip_rate * n * n)
    if n_flips:
        rng = np.random.default_rng(seed)
        flat = rng.choice(n * n, size=n_flips, replace=False)
        rows, cols = np.unravel_index(flat, (n, n))
        adjacency[rows, cols] = 1 - adjacency[rows, cols]

    net = ObservedNetwork(
        n=n, adjacency=adjacency, directed=True, include_diagonal=True
    )
    truth = GroundTruthMembership(assignments=assignments, d=num_cliques)
    return net, truth
