import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np
from PIL import Image, UnidentifiedImageError

from app.core.errors import ImageFormatError, ImageIOError, ImageSizeError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

_PNM_HEADER = re.compile(rb"^(P[1-7])\s+(?:#.*\s+)*(\d+)\s+(?:#.*\s+)*(\d+)\s+(?:#.*\s+)*(\d+)\s")


@dataclass(frozen=True)
class GrayImage:
    """A 2-D grid of 8-bit intensities, stored row-major as a (height, width) uint8 array."""
    pixels: np.ndarray

    def __post_init__(self):
        pixels = np.asarray(self.pixels)
        if pixels.ndim != 2 or pixels.shape[0] < 1 or pixels.shape[1] < 1:
            raise ImageSizeError(f"GrayImage needs a non-empty 2-D grid, got shape {pixels.shape}.")
        if pixels.dtype != np.uint8:
            if pixels.size and (pixels.min() < 0 or pixels.max() > 255):
                raise ImageFormatError("GrayImage intensities must lie in [0, 255].")
        pixels = np.array(pixels, dtype=np.uint8)
        pixels.flags.writeable = False
        object.__setattr__(self, "pixels", pixels)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def data(self) -> bytes:
        return self.pixels.tobytes()

    @classmethod
    def from_rows(cls, rows) -> "GrayImage":
        return cls(np.array(rows, dtype=np.int64))


def round_half_up(values: np.ndarray) -> np.ndarray:
    return np.floor(np.asarray(values, dtype=np.float64) + 0.5)


def to_grayscale(r, g, b):
    """Luma reduction with weights 0.299/0.587/0.114, rounded half up.

    Works on scalars or numpy arrays; integer arithmetic keeps the rounding exact.
    """
    weighted = (
        np.asarray(r, dtype=np.int64) * 299
        + np.asarray(g, dtype=np.int64) * 587
        + np.asarray(b, dtype=np.int64) * 114
    )
    gray = (2 * weighted + 1000) // 2000
    if np.ndim(gray) == 0:
        return int(gray)
    return gray.astype(np.uint8)


def _check_pnm_header(path: Path, head: bytes) -> None:
    match = _PNM_HEADER.match(head)
    if not match:
        raise ImageFormatError(f"{path}: malformed PNM header.")
    magic, maxval = match.group(1), int(match.group(4))
    if magic != b"P5":
        raise ImageFormatError(f"{path}: only binary PGM (P5) is supported, got {magic.decode()}.")
    if maxval != 255:
        raise ImageFormatError(f"{path}: PGM maxval must be 255, got {maxval}.")


def load_image(path: PathLike) -> GrayImage:
    """Decodes a binary PGM (P5, maxval 255) or an 8-bit gray/RGB PNG into a GrayImage."""
    path = Path(path)
    try:
        with open(path, "rb") as f:
            head = f.read(512)
    except FileNotFoundError as e:
        raise ImageIOError(f"{path}: file not found.") from e
    except OSError as e:
        raise ImageIOError(f"{path}: {e}") from e
    # PNM headers are checked before decoding; Pillow would widen 16-bit PGMs silently.
    if head[:1] == b"P" and head[1:2].isdigit():
        _check_pnm_header(path, head)

    try:
        with Image.open(path) as img:
            img_format = img.format
            if img_format not in ("PPM", "PNG"):
                raise ImageFormatError(f"{path}: unsupported image format {img_format}.")
            mode = img.mode
            if mode not in ("L", "RGB"):
                raise ImageFormatError(f"{path}: unsupported {img_format} mode {mode}; need 8-bit gray or RGB.")
            array = np.asarray(img)
    except FileNotFoundError as e:
        raise ImageIOError(f"{path}: file not found.") from e
    except UnidentifiedImageError as e:
        raise ImageFormatError(f"{path}: not a PGM or PNG image.") from e
    except OSError as e:
        raise ImageIOError(f"{path}: {e}") from e

    if mode == "RGB":
        array = to_grayscale(array[..., 0], array[..., 1], array[..., 2])
    logger.debug(f"Loaded {path} ({img_format} {mode}, {array.shape[1]}x{array.shape[0]}).")
    return GrayImage(array)


def save_pgm(img: GrayImage, path: PathLike) -> None:
    """Writes the image as binary PGM (P5, maxval 255)."""
    path = Path(path)
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    try:
        with open(path, "wb") as f:
            f.write(header)
            f.write(img.data)
    except OSError as e:
        raise ImageIOError(f"Cannot write {path}: {e}") from e


def resize_bilinear(img: GrayImage, out_w: int, out_h: int) -> GrayImage:
    """Bilinear resampling with half-pixel-centre source mapping and edge clamping."""
    if out_w < 3 or out_h < 3:
        raise ImageSizeError(f"Resize target {out_w}x{out_h} is below the 3x3 minimum.")
    if (out_w, out_h) == (img.width, img.height):
        return img

    src = img.pixels.astype(np.float64)

    def axis_weights(n_in: int, n_out: int):
        coords = (np.arange(n_out, dtype=np.float64) + 0.5) * n_in / n_out - 0.5
        coords = np.clip(coords, 0.0, n_in - 1)
        lo = np.floor(coords).astype(np.int64)
        hi = np.minimum(lo + 1, n_in - 1)
        return lo, hi, coords - lo

    x0, x1, fx = axis_weights(img.width, out_w)
    y0, y1, fy = axis_weights(img.height, out_h)

    top = src[y0][:, x0] + (src[y0][:, x1] - src[y0][:, x0]) * fx
    bottom = src[y1][:, x0] + (src[y1][:, x1] - src[y1][:, x0]) * fx
    blended = top + (bottom - top) * fy[:, None]

    out = np.clip(round_half_up(blended), img.pixels.min(), img.pixels.max())
    return GrayImage(out.astype(np.uint8))
