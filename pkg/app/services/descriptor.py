"""Local Tri-Directional Pattern descriptor and the classic LBP baseline.

Neighbour order is clockwise from the top-left pixel (NW, N, NE, E, SE, S, SW, W) and
neighbour i lands on bit i-1 of every 8-bit code. Border pixels are skipped, so code maps
cover the (W-2) x (H-2) interior.
"""
import logging
from dataclasses import dataclass
from typing import NamedTuple, Tuple

import numpy as np

from app.core.errors import ImageSizeError, OutOfDomainError
from app.services.imaging import GrayImage

logger = logging.getLogger(__name__)

# (row, column) offsets of I_1 .. I_8
NEIGHBOR_OFFSETS: Tuple[Tuple[int, int], ...] = (
    (-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1),
)
BIT_WEIGHTS = np.array([1 << bit for bit in range(8)], dtype=np.int64)
SUPPORTED_BINS = (256, 50)


class NeighborRing(NamedTuple):
    values: Tuple[int, ...]
    center: int

    def at(self, i: int) -> int:
        """I_i with 1-based wraparound indexing (0 -> 8, 9 -> 1)."""
        return self.values[(i - 1) % 8]


class DifferenceTriple(NamedTuple):
    d1: int
    d2: int
    d3: int


@dataclass(frozen=True)
class CodeMaps:
    pattern1: np.ndarray
    pattern2: np.ndarray
    magnitude: np.ndarray

    @property
    def shape(self) -> Tuple[int, int]:
        return self.pattern1.shape


# --- Per-pixel operations ---

def neighbor_ring(img: GrayImage, x: int, y: int) -> NeighborRing:
    if not (1 <= x <= img.width - 2 and 1 <= y <= img.height - 2):
        raise OutOfDomainError(f"({x}, {y}) is not an interior pixel of a {img.width}x{img.height} image.")
    px = img.pixels
    values = tuple(int(px[y + dy, x + dx]) for dy, dx in NEIGHBOR_OFFSETS)
    return NeighborRing(values=values, center=int(px[y, x]))


def difference_triple(ring: NeighborRing, i: int) -> DifferenceTriple:
    if not 1 <= i <= 8:
        raise OutOfDomainError(f"Neighbour index must be in 1..8, got {i}.")
    current = ring.at(i)
    return DifferenceTriple(
        d1=current - ring.at(i - 1),
        d2=current - ring.at(i + 1),
        d3=current - ring.center,
    )


def ternary_value(t: DifferenceTriple) -> int:
    """Number of strictly negative differences, modulo 3."""
    return sum(1 for d in t if d < 0) % 3


def encode_patterns(ring: NeighborRing) -> Tuple[int, int]:
    pattern1 = pattern2 = 0
    for i in range(1, 9):
        f = ternary_value(difference_triple(ring, i))
        if f == 1:
            pattern1 |= 1 << (i - 1)
        elif f == 2:
            pattern2 |= 1 << (i - 1)
    return pattern1, pattern2


def magnitude_code(ring: NeighborRing) -> int:
    """Sets bit i-1 when the adjacent neighbours sit at least as far from the centre as from I_i.

    Squared magnitudes are compared; sqrt is monotone so the tie rule M1 >= M2 is preserved exactly.
    """
    code = 0
    for i in range(1, 9):
        prev, cur, nxt = ring.at(i - 1), ring.at(i), ring.at(i + 1)
        m1 = (prev - ring.center) ** 2 + (nxt - ring.center) ** 2
        m2 = (prev - cur) ** 2 + (nxt - cur) ** 2
        if m1 >= m2:
            code |= 1 << (i - 1)
    return code


def lbp_code(ring: NeighborRing) -> int:
    code = 0
    for i, value in enumerate(ring.values):
        if value >= ring.center:
            code |= 1 << i
    return code


# --- Whole-image maps ---

def _neighbor_stack(img: GrayImage) -> Tuple[np.ndarray, np.ndarray]:
    """Returns (neighbours, centre): an (8, H-2, W-2) stack of I_1..I_8 and the (H-2, W-2) centres."""
    if img.width < 3 or img.height < 3:
        raise ImageSizeError(f"Descriptor needs at least 3x3 pixels, got {img.width}x{img.height}.")
    px = img.pixels.astype(np.int32)
    h, w = px.shape
    neighbors = np.stack([
        px[1 + dy:h - 1 + dy, 1 + dx:w - 1 + dx] for dy, dx in NEIGHBOR_OFFSETS
    ])
    return neighbors, px[1:h - 1, 1:w - 1]


def _pack_bits(bits: np.ndarray) -> np.ndarray:
    return np.tensordot(BIT_WEIGHTS, bits.astype(np.int64), axes=1).astype(np.uint8)


def code_maps(img: GrayImage) -> CodeMaps:
    neighbors, center = _neighbor_stack(img)
    prev = np.roll(neighbors, 1, axis=0)
    nxt = np.roll(neighbors, -1, axis=0)

    negatives = (
        (neighbors - prev < 0).astype(np.int8)
        + (neighbors - nxt < 0)
        + (neighbors - center < 0)
    )
    ternary = negatives % 3

    m1 = (prev - center) ** 2 + (nxt - center) ** 2
    m2 = (prev - neighbors) ** 2 + (nxt - neighbors) ** 2

    return CodeMaps(
        pattern1=_pack_bits(ternary == 1),
        pattern2=_pack_bits(ternary == 2),
        magnitude=_pack_bits(m1 >= m2),
    )


def lbp_map(img: GrayImage) -> np.ndarray:
    neighbors, center = _neighbor_stack(img)
    return _pack_bits(neighbors >= center)


# --- Histograms and feature vectors ---

def histogram_of_codes(code_map: np.ndarray, bins: int = 256) -> np.ndarray:
    if bins not in SUPPORTED_BINS:
        raise ValueError(f"bins must be one of {SUPPORTED_BINS}, got {bins}.")
    codes = np.asarray(code_map, dtype=np.int64).ravel()
    if bins != 256:
        codes = codes * bins // 256
    return np.bincount(codes, minlength=bins).astype(np.float64)


def extract_feature(img: GrayImage, bins: int = 256) -> np.ndarray:
    """Concatenated pattern1 | pattern2 | magnitude histograms; dimension 3 * bins."""
    maps = code_maps(img)
    return np.concatenate([
        histogram_of_codes(maps.pattern1, bins),
        histogram_of_codes(maps.pattern2, bins),
        histogram_of_codes(maps.magnitude, bins),
    ])


def extract_lbp_feature(img: GrayImage, bins: int = 256) -> np.ndarray:
    return histogram_of_codes(lbp_map(img), bins)


def feature_dim(descriptor: str, bins: int) -> int:
    return 3 * bins if descriptor == "ltridp" else bins
