from typing import Tuple

import numpy as np
from pydantic import BaseModel, field_validator, model_validator


class ObservedNetwork(BaseModel):
    """
    Binary n x n adjacency Y. Undirected networks are stored symmetric;
    when include_diagonal is False the self-pairs carry no information.
    """

    n: int
    adjacency: np.ndarray
    directed: bool = False
    include_diagonal: bool = False

    class Config:
        arbitrary_types_allowed = True
        frozen = True

    @field_validator("adjacency", mode="before")
    @classmethod
    def _as_int_matrix(cls, v):
        arr = np.asarray(v)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"adjacency must be square, got shape {arr.shape}")
        if not np.all((arr == 0) | (arr == 1)):
            raise ValueError("adjacency entries must be exactly 0 or 1")
        arr = arr.astype(np.int8)
        arr.setflags(write=False)
        return arr

    @model_validator(mode="after")
    def _check_shape_and_symmetry(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.adjacency.shape != (self.n, self.n):
            raise ValueError(
                f"adjacency shape {self.adjacency.shape} does not match n={self.n}"
            )
        if not self.directed and not np.array_equal(self.adjacency, self.adjacency.T):
            raise ValueError("undirected network must have a symmetric adjacency")
        return self

    def modeled_pairs(self) -> np.ndarray:
        """
        Canonical index set that a hold-out split partitions: all ordered
        pairs when directed, i <= j pairs when undirected, with the diagonal
        dropped unless include_diagonal.
        """
        i, j = np.indices((self.n, self.n))
        keep = np.ones((self.n, self.n), dtype=bool)
        if not self.directed:
            keep &= i <= j
        if not self.include_diagonal:
            keep &= i != j
        return np.column_stack([i[keep], j[keep]])


class ObservationMask(BaseModel):
    n: int
    pairs: np.ndarray
    mirrored: bool = False

    class Config:
        arbitrary_types_allowed = True
        frozen = True

    @field_validator("pairs", mode="before")
    @classmethod
    def _as_pair_array(cls, v):
        arr = np.asarray(v, dtype=np.int64)
        if arr.size == 0:
            arr = arr.reshape(0, 2)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ValueError(f"pairs must have shape (k, 2), got {arr.shape}")
        arr.setflags(write=False)
        return arr

    @model_validator(mode="after")
    def _check_indices(self):
        if self.pairs.size and (self.pairs.min() < 0 or self.pairs.max() >= self.n):
            raise ValueError(f"pair index out of range for n={self.n}")
        if len({(int(a), int(b)) for a, b in self.pairs}) != len(self.pairs):
            raise ValueError("duplicate pairs in mask")
        return self

    def __len__(self) -> int:
        return len(self.pairs)

    def to_matrix(self) -> np.ndarray:
        out = np.zeros((self.n, self.n), dtype=bool)
        if len(self.pairs):
            out[self.pairs[:, 0], self.pairs[:, 1]] = True
            if self.mirrored:
                out[self.pairs[:, 1], self.pairs[:, 0]] = True
        return out

    def as_tuples(self) -> list[Tuple[int, int]]:
        return [(int(a), int(b)) for a, b in self.pairs]


class SideInfo(BaseModel):
    features: np.ndarray

    class Config:
        arbitrary_types_allowed = True
        frozen = True

    @field_validator("features", mode="before")
    @classmethod
    def _as_tensor(cls, v):
        arr = np.asarray(v, dtype=float)
        if arr.ndim != 3 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"features must have shape (n, n, p), got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("side information must be finite")
        return arr

    @property
    def p(self) -> int:
        return self.features.shape[2]

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @classmethod
    def empty(cls, n: int) -> "SideInfo":
        return cls(features=np.zeros((n, n, 0)))


class GroundTruthMembership(BaseModel):
    assignments: np.ndarray
    d: int

    class Config:
        arbitrary_types_allowed = True
        frozen = True

    @field_validator("assignments", mode="before")
    @classmethod
    def _as_index_vector(cls, v):
        return np.asarray(v, dtype=np.int64).ravel()

    @model_validator(mode="after")
    def _check_range(self):
        if self.assignments.size and (
            self.assignments.min() < 0 or self.assignments.max() >= self.d
        ):
            raise ValueError(f"group index out of range [0, {self.d})")
        return self

    @property
    def one_hot(self) -> np.ndarray:
        """d x n matrix U0 whose column i is e_{c_i}."""
        n = self.assignments.size
        out = np.zeros((self.d, n))
        out[self.assignments, np.arange(n)] = 1.0
        return out
