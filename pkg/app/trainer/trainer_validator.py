from typing import List, Literal, Optional

import numpy as np
from pydantic import BaseModel, Field, PositiveFloat

from app.core.config import settings
from app.inference.inference_validator import KernelParams, MembershipMatrix


class FitConfig(BaseModel):
    d: int = Field(settings.d, ge=1)
    gamma: float = Field(settings.gamma, gt=0)
    gamma_grid: List[PositiveFloat] = Field(default_factory=lambda: list(settings.gamma_grid))
    l1_strength: float = Field(settings.l1_strength, ge=0, alias="lambda")
    sigma_beta_sq: float = Field(settings.sigma_beta_sq, gt=0)
    jitter: float = Field(settings.jitter, ge=0)
    rank_m: Optional[int] = Field(settings.rank_m, ge=1)

    tol_e: float = Field(settings.tol_e, gt=0)
    tol_outer: float = Field(settings.tol_outer, gt=0)
    max_e: int = Field(settings.max_e, ge=1)
    max_outer: int = Field(settings.max_outer, ge=1)
    max_mstep: int = Field(settings.max_mstep, ge=1)

    seed: int = settings.seed
    nonnegative: bool = settings.nonnegative
    include_diagonal: bool = False
    init_mode: Literal["gaussian", "spectral"] = settings.init_mode
    spectral_method: Literal["dense", "lanczos"] = settings.spectral_method

    class Config:
        populate_by_name = True
        extra = "forbid"

    @property
    def kernel_params(self) -> KernelParams:
        return KernelParams(gamma=self.gamma, jitter=self.jitter)


class IterationRecord(BaseModel):
    iteration: int
    f_value: float
    elbo: float
    penalized_bound: float
    estep_sweeps: int
    mstep_warnflag: bool
    seconds: float


class FittedModel(BaseModel):
    U: MembershipMatrix
    M_mean: np.ndarray
    beta_mean: np.ndarray
    beta_cov: np.ndarray
    config: FitConfig
    diagnostics: List[IterationRecord] = []

    class Config:
        arbitrary_types_allowed = True
        frozen = True

    @property
    def n(self) -> int:
        return self.M_mean.shape[0]


class GammaScore(BaseModel):
    gamma: float
    validation_auc: float


class CrossValidationResult(BaseModel):
    best_gamma: float
    table: List[GammaScore]
    failures: List[str] = []
    model: FittedModel


class ModelManifest(BaseModel):
    """Contents of config.json in a saved model directory."""

    config: FitConfig
    n: int = Field(ge=1)
    directed: bool
    include_diagonal: bool
