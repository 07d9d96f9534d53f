from typing import Optional

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator


class KernelParams(BaseModel):
    gamma: float = Field(gt=0)
    jitter: float = Field(1e-6, ge=0)

    class Config:
        frozen = True


class MembershipMatrix(BaseModel):
    """d x n matrix U; column i is node i's membership vector."""

    values: np.ndarray
    nonnegative: bool = False

    class Config:
        arbitrary_types_allowed = True
        frozen = True

    @field_validator("values", mode="before")
    @classmethod
    def _as_matrix(cls, v):
        arr = np.array(v, dtype=float)
        if arr.ndim != 2:
            raise ValueError(f"membership matrix must be 2-d, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("membership matrix has non-finite entries")
        arr.setflags(write=False)
        return arr

    @model_validator(mode="after")
    def _check_sign(self):
        if self.nonnegative and self.values.size and self.values.min() < 0:
            raise ValueError("nonnegative membership matrix has negative entries")
        return self

    @property
    def d(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]


class SpectralCache(BaseModel):
    """
    Eigen-representation of an E-step kernel: V (n x m, orthonormal columns),
    eigenvalues in non-increasing order and the shrinkage matrix
    D_ab = l_a l_b / (1 + l_a l_b).
    """

    V: np.ndarray
    eigenvalues: np.ndarray
    D: np.ndarray

    class Config:
        arbitrary_types_allowed = True
        frozen = True

    @property
    def rank(self) -> int:
        return self.eigenvalues.size

    @property
    def n(self) -> int:
        return self.V.shape[0]

    def permuted(self, perm: np.ndarray) -> "SpectralCache":
        """Same cache with node indices relabeled by perm."""
        return SpectralCache(V=self.V[perm], eigenvalues=self.eigenvalues, D=self.D)


class VariationalState(BaseModel):
    """
    Factors of q(Z) q(M) q(beta). Z_loc holds the location of each q(z_ij)
    (a truncated normal on observed pairs, a plain normal otherwise);
    Z_mean is its mean.
    """

    M_mean: np.ndarray
    Z_mean: np.ndarray
    Z_loc: np.ndarray
    beta_mean: np.ndarray
    beta_cov: np.ndarray
    P_mean: np.ndarray

    class Config:
        arbitrary_types_allowed = True

    @property
    def n(self) -> int:
        return self.M_mean.shape[0]

    def copy(self) -> "VariationalState":
        return VariationalState(
            **{name: getattr(self, name).copy() for name in type(self).model_fields}
        )


class MstepProblem(BaseModel):
    """Everything the M-step holds fixed while it moves U."""

    cache: SpectralCache
    M_mean: np.ndarray
    l1_strength: float = Field(ge=0)
    kernel_params: KernelParams
    nonnegative: bool = False

    class Config:
        arbitrary_types_allowed = True
        frozen = True


class MstepResult(BaseModel):
    U: np.ndarray
    penalized_value: float
    n_iter: int
    warnflag: bool = False
    message: Optional[str] = None

    class Config:
        arbitrary_types_allowed = True
