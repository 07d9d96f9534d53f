"""
File formats for networks, masks and membership matrices.
"""
from pathlib import Path
from typing import Iterable, List

import numpy as np
import pandas as pd
from pydantic import ValidationError

from app.core.errors import EdgeListParseError, InputError
from app.core.logging_utils import get_logger
from app.netdata.netdata_validator import (
    GroundTruthMembership,
    ObservationMask,
    ObservedNetwork,
)

logger = get_logger(__name__)

# round-trip decimal precision for every float written to disk
FLOAT_FORMAT = "%.17g"


def parse_edge_list(
    lines: Iterable[str],
    n: int,
    directed: bool = False,
    include_diagonal: bool = False,
) -> ObservedNetwork:
    """
    Parse whitespace-separated, zero-based "i j" lines into an adjacency.
    Lines starting with '#' and blank lines are skipped; repeated edges
    are idempotent.
    """
    adjacency = np.zeros((n, n), dtype=np.int8)

    for line_number, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue

        tokens = line.split()
        if len(tokens) != 2:
            raise EdgeListParseError(
                line_number, f"expected two node indices, got {len(tokens)} tokens"
            )
        try:
            i, j = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise EdgeListParseError(line_number, f"malformed node index in {line!r}")

        if not (0 <= i < n and 0 <= j < n):
            raise InputError(f"line {line_number}: node index out of range for n={n}")

        adjacency[i, j] = 1
        if not directed:
            adjacency[j, i] = 1

    return ObservedNetwork(
        n=n,
        adjacency=adjacency,
        directed=directed,
        include_diagonal=include_diagonal,
    )


def serialize_edge_list(net: ObservedNetwork) -> List[str]:
    """Inverse of parse_edge_list; undirected ties are written once (i <= j)."""
    rows, cols = np.nonzero(net.adjacency)
    lines = []
    for i, j in zip(rows.tolist(), cols.tolist()):
        if not net.directed and i > j:
            continue
        lines.append(f"{i} {j}")
    return lines


def read_edge_list(
    path: Path, n: int, directed: bool = False, include_diagonal: bool = False
) -> ObservedNetwork:
    with open(path) as f:
        net = parse_edge_list(f, n, directed=directed, include_diagonal=include_diagonal)
    logger.info(f"Loaded edge list {path}: n={n}, edges={int(net.adjacency.sum())}")
    return net


def write_adjacency_csv(net: ObservedNetwork, path: Path) -> None:
    pd.DataFrame(net.adjacency).to_csv(path, header=False, index=False)


def read_adjacency_csv(
    path: Path, directed: bool = True, include_diagonal: bool = True
) -> ObservedNetwork:
    df = pd.read_csv(path, header=None)
    try:
        return ObservedNetwork(
            n=df.shape[0],
            adjacency=df.to_numpy(),
            directed=directed,
            include_diagonal=include_diagonal,
        )
    except ValidationError as e:
        raise InputError(f"{path}: invalid adjacency matrix: {e}")


def write_matrix_csv(matrix: np.ndarray, path: Path) -> None:
    pd.DataFrame(np.atleast_2d(matrix)).to_csv(
        path, header=False, index=False, float_format=FLOAT_FORMAT
    )


def read_matrix_csv(path: Path) -> np.ndarray:
    return pd.read_csv(path, header=None).to_numpy(dtype=float)


def write_pairs_csv(mask: ObservationMask, path: Path) -> None:
    pd.DataFrame(mask.pairs, columns=["i", "j"]).to_csv(path, index=False)


def read_pairs_csv(path: Path, n: int, mirrored: bool = False) -> ObservationMask:
    df = pd.read_csv(path)
    return ObservationMask(n=n, pairs=df[["i", "j"]].to_numpy(), mirrored=mirrored)


def write_memberships_csv(U: np.ndarray, path: Path) -> None:
    """One row per node: node id followed by its d membership values."""
    d, n = U.shape
    df = pd.DataFrame(U.T, columns=[f"u_{r}" for r in range(d)])
    df.insert(0, "node", np.arange(n))
    df.to_csv(path, index=False, float_format=FLOAT_FORMAT)


def read_memberships_csv(path: Path) -> np.ndarray:
    df = pd.read_csv(path).sort_values("node")
    return df.drop(columns=["node"]).to_numpy(dtype=float).T


def write_truth_csv(truth: GroundTruthMembership, path: Path) -> None:
    df = pd.DataFrame({"node": np.arange(truth.assignments.size), "group": truth.assignments})
    df.to_csv(path, index=False)


def read_truth_csv(path: Path, d: int) -> GroundTruthMembership:
    df = pd.read_csv(path).sort_values("node")
    return GroundTruthMembership(assignments=df["group"].to_numpy(), d=d)
