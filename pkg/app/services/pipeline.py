import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Union

import numpy as np

from app.core.errors import LtridpError
from app.schemas.svm_schemas import PreprocessingFlags
from app.services import preprocess
from app.services.descriptor import extract_feature, extract_lbp_feature, feature_dim
from app.services.imaging import GrayImage, PathLike, load_image, resize_bilinear

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ExtractionConfig:
    bins: int = 256
    descriptor: str = "ltridp"
    preprocessing: PreprocessingFlags = field(default_factory=PreprocessingFlags)

    @property
    def dim(self) -> int:
        return feature_dim(self.descriptor, self.bins)


@dataclass(frozen=True)
class ExtractionResult:
    path: str
    feature: Optional[np.ndarray] = None
    error: Optional[str] = None


def prepare_image(img: GrayImage, flags: PreprocessingFlags) -> GrayImage:
    """resize -> normalize -> equalize, each step switchable."""
    if flags.resize:
        img = resize_bilinear(img, flags.canonical_size, flags.canonical_size)
    if flags.normalize:
        img = preprocess.minmax_normalize(img)
    if flags.equalize:
        img = preprocess.equalize(img)
    return img


def feature_from_image(img: GrayImage, config: ExtractionConfig) -> np.ndarray:
    prepared = prepare_image(img, config.preprocessing)
    if config.descriptor == "lbp":
        return extract_lbp_feature(prepared, config.bins)
    return extract_feature(prepared, config.bins)


def feature_from_path(path: PathLike, config: ExtractionConfig) -> np.ndarray:
    return feature_from_image(load_image(path), config)


def _extract_one(path: Union[str, PathLike], config: ExtractionConfig) -> ExtractionResult:
    try:
        return ExtractionResult(path=str(path), feature=feature_from_path(path, config))
    except LtridpError as e:
        return ExtractionResult(path=str(path), error=str(e))


def extract_many(paths: Sequence[PathLike], config: ExtractionConfig, jobs: int = 1) -> List[ExtractionResult]:
    """Extracts features for every path. Results come back in input order for any `jobs`."""
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda p: _extract_one(p, config), paths))
    else:
        results = [_extract_one(p, config) for p in paths]
    failed = sum(1 for r in results if r.error)
    logger.info(f"Extracted {len(results) - failed}/{len(results)} images with {jobs} worker(s).")
    return results
