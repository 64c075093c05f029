import csv
import io
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List

import numpy as np
from pydantic import ValidationError

from app.core.errors import FeatureStoreError
from app.schemas.store_schemas import FeatureStoreHeader
from app.services.imaging import PathLike

logger = logging.getLogger(__name__)

HEADER_PREFIX = "# "


@dataclass(frozen=True)
class LabeledSample:
    features: np.ndarray
    label: int
    path: str


@dataclass(frozen=True)
class FeatureStore:
    header: FeatureStoreHeader
    rows: List[LabeledSample]

    @property
    def X(self) -> np.ndarray:
        if not self.rows:
            return np.empty((0, self.header.dim))
        return np.vstack([row.features for row in self.rows])

    @property
    def y(self) -> np.ndarray:
        return np.array([row.label for row in self.rows], dtype=np.int64)


def write_feature_store(path: PathLike, store: FeatureStore) -> None:
    """CSV with a '#'-prefixed JSON header line, then `path,label,f0..f{dim-1}` rows."""
    buffer = io.StringIO()
    buffer.write(HEADER_PREFIX + store.header.model_dump_json() + "\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["path", "label"] + [f"f{i}" for i in range(store.header.dim)])
    for row in store.rows:
        if row.features.shape != (store.header.dim,):
            raise FeatureStoreError(f"Row {row.path} has {row.features.size} values, header says {store.header.dim}.")
        writer.writerow([row.path, row.label] + [repr(float(v)) for v in row.features])
    try:
        Path(path).write_text(buffer.getvalue(), encoding="utf-8")
    except OSError as e:
        raise FeatureStoreError(f"Cannot write feature store {path}: {e}") from e
    logger.info(f"Wrote {len(store.rows)} rows of dim {store.header.dim} to {path}.")


def read_feature_store(path: PathLike) -> FeatureStore:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise FeatureStoreError(f"Cannot read feature store {path}: {e}") from e

    first, _, body = text.partition("\n")
    if not first.startswith(HEADER_PREFIX.strip()):
        raise FeatureStoreError(f"{path}: missing '#' header line.")
    try:
        header = FeatureStoreHeader.model_validate_json(first.lstrip("#").strip())
    except ValidationError as e:
        raise FeatureStoreError(f"{path}: invalid header: {e}") from e

    reader = csv.reader(io.StringIO(body))
    next(reader, None)  # column names
    rows = []
    for line_no, record in enumerate(reader, start=3):
        if not record:
            continue
        if len(record) != header.dim + 2:
            raise FeatureStoreError(f"{path}:{line_no}: expected {header.dim} values, got {len(record) - 2}.")
        try:
            features = np.array([float(v) for v in record[2:]], dtype=np.float64)
            label = int(record[1])
        except ValueError as e:
            raise FeatureStoreError(f"{path}:{line_no}: {e}") from e
        if label not in (1, -1):
            raise FeatureStoreError(f"{path}:{line_no}: label must be +1 or -1, got {record[1]}.")
        rows.append(LabeledSample(features=features, label=label, path=record[0]))
    return FeatureStore(header=header, rows=rows)
