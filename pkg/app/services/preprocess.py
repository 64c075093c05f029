"""Contrast enhancement: intensity histogram, cumulative distribution, min-max scaling and
histogram equalization. All arithmetic stays in integers until the final half-up rounding."""
import logging
from dataclasses import dataclass

import numpy as np

from app.services.imaging import GrayImage

logger = logging.getLogger(__name__)

LEVELS = 256


@dataclass(frozen=True)
class IntensityHistogram:
    counts: np.ndarray
    total: int

    def as_rows(self):
        return [(level, int(count)) for level, count in enumerate(self.counts)]


@dataclass(frozen=True)
class CumulativeDistribution:
    cdf: np.ndarray

    @property
    def total(self) -> int:
        return int(self.cdf[-1])


def _div_round_half_up(numerator: np.ndarray, denominator: int) -> np.ndarray:
    return (2 * numerator + denominator) // (2 * denominator)


def compute_histogram(img: GrayImage) -> IntensityHistogram:
    counts = np.bincount(img.pixels.ravel(), minlength=LEVELS).astype(np.int64)
    return IntensityHistogram(counts=counts, total=int(img.pixels.size))


def compute_cdf(h: IntensityHistogram) -> CumulativeDistribution:
    return CumulativeDistribution(cdf=np.cumsum(h.counts, dtype=np.int64))


def minmax_normalize(img: GrayImage) -> GrayImage:
    """Stretches the intensity range to [0, 255]; a constant image is returned unchanged."""
    lo, hi = int(img.pixels.min()), int(img.pixels.max())
    if lo == hi:
        return img
    shifted = img.pixels.astype(np.int64) - lo
    return GrayImage(_div_round_half_up(shifted * 255, hi - lo).astype(np.uint8))


def equalization_map(h: IntensityHistogram) -> np.ndarray:
    """Per-level transfer function (cdf(v) - cdf_min) / (N - cdf_min) * 255, rounded half up."""
    cdf = compute_cdf(h).cdf
    cdf_min = int(cdf[np.nonzero(cdf)[0][0]])
    span = h.total - cdf_min
    if span == 0:
        return np.arange(LEVELS, dtype=np.uint8)
    mapped = _div_round_half_up(np.clip(cdf - cdf_min, 0, None) * 255, span)
    return mapped.astype(np.uint8)


def equalize(img: GrayImage) -> GrayImage:
    h = compute_histogram(img)
    if np.count_nonzero(h.counts) < 2:
        return img
    lut = equalization_map(h)
    return GrayImage(lut[img.pixels])
