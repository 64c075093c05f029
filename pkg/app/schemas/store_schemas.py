from typing import Literal

from pydantic import BaseModel, Field

from app.schemas.svm_schemas import PreprocessingFlags


class FeatureStoreHeader(BaseModel):
    """JSON header of a feature store; binds every row to one descriptor configuration."""
    dim: int = Field(gt=0)
    bins: int
    descriptor: Literal["ltridp", "lbp"] = "ltridp"
    descriptor_version: int = 1
    preprocessing: PreprocessingFlags = Field(default_factory=PreprocessingFlags)
