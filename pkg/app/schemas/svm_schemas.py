from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

KernelKind = Literal["linear", "quadratic", "cubic", "gaussian"]
SolverKind = Literal["auto", "primal", "smo"]


class KernelSpec(BaseModel):
    """Kernel family plus its parameters. gamma is only meaningful for the gaussian kernel."""
    model_config = ConfigDict(frozen=True)

    kind: KernelKind = "gaussian"
    gamma: Optional[float] = None
    coef0: float = 1.0

    @model_validator(mode="after")
    def _check_gamma(self):
        if self.kind == "gaussian" and (self.gamma is None or self.gamma <= 0):
            raise ValueError("gaussian kernel needs gamma > 0")
        return self

    @property
    def degree(self) -> int:
        return {"quadratic": 2, "cubic": 3}.get(self.kind, 1)


class TrainerConfig(BaseModel):
    """Hyperparameters for one training run. A gamma of None resolves to 1 / feature_dim."""
    model_config = ConfigDict(frozen=True)

    kernel: KernelKind = "gaussian"
    solver: SolverKind = "auto"
    c: float = Field(default=1.0, gt=0)
    gamma: Optional[float] = Field(default=None, gt=0)
    coef0: float = 1.0
    tol: float = Field(default=1e-3, gt=0)
    max_passes: int = Field(default=10, ge=1)
    epochs: Optional[int] = Field(default=None, ge=1)

    def kernel_spec(self, feature_dim: int) -> KernelSpec:
        gamma = None
        if self.kernel == "gaussian":
            gamma = self.gamma if self.gamma is not None else 1.0 / feature_dim
        return KernelSpec(kind=self.kernel, gamma=gamma, coef0=self.coef0)

    def resolved_solver(self) -> str:
        if self.solver == "auto":
            return "primal" if self.kernel == "linear" else "smo"
        return self.solver


class Hyperparameters(BaseModel):
    solver: Literal["primal", "smo"]
    c: float
    tol: Optional[float] = None
    max_passes: Optional[int] = None
    epochs: Optional[int] = None
    seed: int


class ScalerDocument(BaseModel):
    mean: List[float]
    stddev: List[float]


class SupportVectorDocument(BaseModel):
    vector: List[float]
    label: int
    alpha: float


class PreprocessingFlags(BaseModel):
    """How images were turned into features; baked into stores and models."""
    model_config = ConfigDict(frozen=True)

    resize: bool = True
    canonical_size: int = 256
    equalize: bool = True
    normalize: bool = False


class ModelDocument(BaseModel):
    """On-disk JSON form of a trained model."""
    format_version: int
    kernel: KernelSpec
    hyperparameters: Hyperparameters
    scaler: ScalerDocument
    bias: float
    weights: Optional[List[float]] = None
    support_vectors: Optional[List[SupportVectorDocument]] = None
    label_names: Dict[int, str]
    feature_dim: int
    bins: int
    descriptor: Literal["ltridp", "lbp"] = "ltridp"
    preprocessing: PreprocessingFlags = Field(default_factory=PreprocessingFlags)

    @model_validator(mode="after")
    def _check_solution(self):
        if (self.weights is None) == (self.support_vectors is None):
            raise ValueError("exactly one of weights / support_vectors must be present")
        return self
