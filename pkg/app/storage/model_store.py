import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict

import numpy as np
from pydantic import ValidationError

from app.core.config import settings
from app.core.errors import ModelFileError
from app.schemas.svm_schemas import (
    Hyperparameters,
    ModelDocument,
    PreprocessingFlags,
    ScalerDocument,
    SupportVectorDocument,
)
from app.services.imaging import PathLike
from app.services.svm import ScalerParams, SvmModel

logger = logging.getLogger(__name__)


@dataclass
class ModelBundle:
    """A trained model together with the feature configuration it was trained on."""
    model: SvmModel
    bins: int
    descriptor: str = "ltridp"
    preprocessing: PreprocessingFlags = field(default_factory=PreprocessingFlags)
    label_names: Dict[int, str] = field(default_factory=lambda: dict(settings.label_names))

    @property
    def feature_dim(self) -> int:
        return self.model.feature_dim


def to_document(bundle: ModelBundle) -> ModelDocument:
    m = bundle.model
    support = None
    if m.support_vectors is not None:
        support = [
            SupportVectorDocument(vector=vector.tolist(), label=int(label), alpha=float(alpha))
            for vector, label, alpha in zip(m.support_vectors, m.support_labels, m.support_alphas)
        ]
    return ModelDocument(
        format_version=settings.model_format_version,
        kernel=m.kernel,
        hyperparameters=Hyperparameters(
            solver=m.solver, c=m.c, tol=m.tol, max_passes=m.max_passes, epochs=m.epochs, seed=m.seed,
        ),
        scaler=ScalerDocument(mean=m.scaler.mean.tolist(), stddev=m.scaler.stddev.tolist()),
        bias=float(m.bias),
        weights=None if m.weights is None else m.weights.tolist(),
        support_vectors=support,
        label_names=bundle.label_names,
        feature_dim=m.feature_dim,
        bins=bundle.bins,
        descriptor=bundle.descriptor,
        preprocessing=bundle.preprocessing,
    )


def from_document(doc: ModelDocument) -> ModelBundle:
    if doc.format_version != settings.model_format_version:
        raise ModelFileError(f"Unsupported model format version {doc.format_version}.")
    scaler = ScalerParams(mean=np.array(doc.scaler.mean), stddev=np.array(doc.scaler.stddev))
    if scaler.dim != doc.feature_dim or scaler.stddev.shape[0] != doc.feature_dim:
        raise ModelFileError(f"Scaler length {scaler.dim} does not match feature_dim {doc.feature_dim}.")
    hp = doc.hyperparameters
    model = SvmModel(
        kernel=doc.kernel, scaler=scaler, bias=doc.bias, c=hp.c, seed=hp.seed, solver=hp.solver,
        tol=hp.tol, max_passes=hp.max_passes, epochs=hp.epochs,
    )
    if doc.weights is not None:
        if len(doc.weights) != doc.feature_dim:
            raise ModelFileError(f"Weight vector length {len(doc.weights)} does not match feature_dim {doc.feature_dim}.")
        model.weights = np.array(doc.weights)
    else:
        support = doc.support_vectors or []
        if any(len(sv.vector) != doc.feature_dim for sv in support):
            raise ModelFileError(f"Support vector length does not match feature_dim {doc.feature_dim}.")
        model.support_vectors = np.array([sv.vector for sv in support]).reshape(-1, doc.feature_dim)
        model.support_labels = np.array([float(sv.label) for sv in support])
        model.support_alphas = np.array([sv.alpha for sv in support])
    return ModelBundle(
        model=model, bins=doc.bins, descriptor=doc.descriptor,
        preprocessing=doc.preprocessing, label_names=dict(doc.label_names),
    )


def save_model(bundle: ModelBundle, path: PathLike) -> None:
    text = json.dumps(to_document(bundle).model_dump(mode="json"), indent=2)
    try:
        Path(path).write_text(text + "\n", encoding="utf-8")
    except OSError as e:
        raise ModelFileError(f"Cannot write model {path}: {e}") from e
    logger.info(f"Model saved to {path}.")


def load_model(path: PathLike) -> ModelBundle:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        doc = ModelDocument.model_validate(raw)
    except OSError as e:
        raise ModelFileError(f"Cannot read model {path}: {e}") from e
    except (json.JSONDecodeError, ValidationError) as e:
        raise ModelFileError(f"{path} is not a valid model file: {e}") from e
    return from_document(doc)
