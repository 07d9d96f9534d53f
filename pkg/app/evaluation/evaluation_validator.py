from typing import List, Optional

from pydantic import BaseModel, Field


class SeedMetrics(BaseModel):
    seed: int
    auc: float = Field(ge=0, le=1)
    membership_distance: Optional[float] = Field(None, ge=0)
    unaligned_distance: Optional[float] = Field(None, ge=0)
    baseline_auc: Optional[float] = Field(None, ge=0, le=1)


class MetricReport(BaseModel):
    per_seed: List[SeedMetrics]
    auc_mean: float
    auc_se: float
    membership_distance_mean: Optional[float] = None
    membership_distance_se: Optional[float] = None
    unaligned_distance_mean: Optional[float] = None
    baseline_auc_mean: Optional[float] = None
    baseline_auc_se: Optional[float] = None

    @property
    def auc(self) -> float:
        return self.auc_mean
