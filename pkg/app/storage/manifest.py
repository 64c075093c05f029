import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List

from app.core.errors import ManifestError
from app.services.imaging import PathLike

logger = logging.getLogger(__name__)

LABELS = {"bag": 1, "nobag": -1}


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    resolved: Path
    label: int


@dataclass(frozen=True)
class DatasetManifest:
    source: Path
    entries: List[ManifestEntry]

    def __len__(self) -> int:
        return len(self.entries)


def read_manifest(path: PathLike) -> DatasetManifest:
    """Reads a `path,label` CSV (labels bag / nobag). Relative paths resolve against the manifest's folder."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ManifestError(f"Cannot read manifest {path}: {e}") from e

    entries: List[ManifestEntry] = []
    seen = set()
    for line_no, row in enumerate(csv.reader(text.splitlines()), start=1):
        if not row or not "".join(row).strip() or row[0].lstrip().startswith("#"):
            continue
        cells = [cell.strip() for cell in row]
        if line_no == 1 and [c.lower() for c in cells] == ["path", "label"]:
            continue
        if len(cells) != 2:
            raise ManifestError(f"{path}:{line_no}: expected 'path,label', got {row!r}.")
        image_path, label_name = cells
        label = LABELS.get(label_name.lower())
        if label is None:
            raise ManifestError(f"{path}:{line_no}: unknown label {label_name!r}; use bag or nobag.")
        if image_path in seen:
            raise ManifestError(f"{path}:{line_no}: duplicate path {image_path}.")
        seen.add(image_path)
        resolved = Path(image_path)
        if not resolved.is_absolute():
            resolved = path.parent / resolved
        entries.append(ManifestEntry(path=image_path, resolved=resolved, label=label))

    logger.info(f"Manifest {path}: {len(entries)} entries.")
    return DatasetManifest(source=path, entries=entries)
