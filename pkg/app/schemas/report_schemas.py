from typing import List, Optional, Tuple

from pydantic import BaseModel, Field


class ConfusionMatrix(BaseModel):
    tp: int = Field(default=0, ge=0)
    fp: int = Field(default=0, ge=0)
    tn: int = Field(default=0, ge=0)
    fn: int = Field(default=0, ge=0)

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(
            tp=self.tp + other.tp, fp=self.fp + other.fp,
            tn=self.tn + other.tn, fn=self.fn + other.fn,
        )


class MetricSet(BaseModel):
    """Scores derived from a confusion matrix. `warnings` names every metric whose
    denominator was zero and which was therefore reported as 0."""
    accuracy: float = 0.0
    precision: float = 0.0
    recall: float = 0.0
    specificity: float = 0.0
    sensitivity: float = 0.0
    fpr: float = 0.0
    warnings: List[str] = Field(default_factory=list)


class EvalReport(MetricSet):
    confusion: ConfusionMatrix = Field(default_factory=ConfusionMatrix)
    n_samples: int = 0
    roc: List[Tuple[float, float]] = Field(default_factory=list)
    auc: Optional[float] = None


class CrossValidationReport(BaseModel):
    k: int
    seed: int
    folds: List[EvalReport]
    mean: EvalReport


class ComparisonRow(BaseModel):
    scheme: str
    kernel: str
    accuracy: float
    precision: float
    recall: float
    specificity: float
    fpr: float
    auc: Optional[float] = None


class ComparisonReport(BaseModel):
    seed: int
    rows: List[ComparisonRow]
