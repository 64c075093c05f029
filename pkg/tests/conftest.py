from pathlib import Path

import numpy as np
import pytest

from app.main import main
from app.services.imaging import GrayImage

WORKED_PATCH = [[5, 3, 8], [9, 6, 2], [4, 1, 7]]


def smooth_texture(rng: np.random.Generator, size: int = 64) -> np.ndarray:
    """Low-frequency texture: a tilted ramp plus one slow sinusoid."""
    yy, xx = np.mgrid[0:size, 0:size] / size
    angle = rng.uniform(0, 2 * np.pi)
    t = xx * np.cos(angle) + yy * np.sin(angle)
    wave = np.sin(2 * np.pi * rng.uniform(0.5, 1.5) * t + rng.uniform(0, 2 * np.pi))
    field = 0.5 + 0.3 * wave + 0.15 * (t - 0.5)
    return np.clip(np.floor(field * 255 + 0.5), 0, 255).astype(np.uint8)


def noise_texture(rng: np.random.Generator, size: int = 64) -> np.ndarray:
    return rng.integers(0, 256, size=(size, size), dtype=np.uint8)


def write_pgm(path: Path, pixels) -> Path:
    pixels = np.asarray(pixels, dtype=np.uint8)
    height, width = pixels.shape
    Path(path).write_bytes(f"P5\n{width} {height}\n255\n".encode("ascii") + pixels.tobytes())
    return Path(path)


def write_texture_dataset(folder: Path, per_class: int, seed: int, size: int = 64) -> Path:
    """Writes `per_class` smooth (bag) and noise (nobag) PGMs plus a manifest; returns the manifest."""
    folder.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    lines = ["path,label"]
    for n in range(per_class):
        write_pgm(folder / f"smooth_{n:03d}.pgm", smooth_texture(rng, size))
        write_pgm(folder / f"noise_{n:03d}.pgm", noise_texture(rng, size))
        lines.append(f"smooth_{n:03d}.pgm,bag")
        lines.append(f"noise_{n:03d}.pgm,nobag")
    manifest = folder / "manifest.csv"
    manifest.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return manifest


@pytest.fixture
def worked_patch() -> GrayImage:
    return GrayImage.from_rows(WORKED_PATCH)


@pytest.fixture
def pgm_writer():
    return write_pgm


@pytest.fixture
def small_dataset(tmp_path) -> Path:
    """12 images per class at 16x16; meant for --no-resize runs."""
    return write_texture_dataset(tmp_path / "small", per_class=12, seed=7, size=16)


@pytest.fixture(scope="session")
def texture_dataset(tmp_path_factory) -> Path:
    return write_texture_dataset(tmp_path_factory.mktemp("textures"), per_class=200, seed=2024)


@pytest.fixture
def run_cli(capsys):
    """Runs the CLI in-process; returns (exit code, stdout)."""
    def run(*argv):
        code = main([str(arg) for arg in argv])
        out, _ = capsys.readouterr()
        return code, out
    return run
