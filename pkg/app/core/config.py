from pydantic_settings import BaseSettings
from typing import List, Literal, Optional


class Settings(BaseSettings):
    # model
    d: int = 3
    gamma: float = 1.0
    gamma_grid: List[float] = [0.01, 0.1, 1.0, 10.0]
    l1_strength: float = 0.1
    sigma_beta_sq: float = 1.0
    jitter: float = 1e-6
    rank_m: Optional[int] = None

    # iteration control
    tol_e: float = 1e-6
    tol_outer: float = 1e-4
    max_e: int = 200
    max_outer: int = 50
    max_mstep: int = 100

    seed: int = 0
    nonnegative: bool = False
    init_mode: Literal["gaussian", "spectral"] = "gaussian"
    spectral_method: Literal["dense", "lanczos"] = "dense"
    train_fraction: float = 0.8

    log_level: str = "INFO"
    output_dir: str = "out"

    class Config:
        env_file = ".env"
        env_prefix = "SMGB_"


settings = Settings()
