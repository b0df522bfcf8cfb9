# ============================================================================
# lab_cli/artifacts.py - Output tree and deterministic JSON / CSV writers
# ============================================================================
# <output_dir>/
#   atlas.json
#   metrics/<name>.grid (+ .json sidecar), metrics/index.json
#   geodesics/<name>-<word>.json
#   reports/*.json, reports/*.csv
# ============================================================================

import csv
import json
import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, List, Sequence, Union

from models import LabInputError
from conformal_field.storage import file_digest

logger = logging.getLogger(__name__)


def slug(label: str) -> str:
    """File-safe name for a metric label"""
    text = re.sub(r"[^A-Za-z0-9.+-]+", "-", label.strip()).strip("-")
    return text or "metric"


def write_json(path: Union[str, Path], payload: Any) -> str:
    """Write sorted, indented JSON; returns the SHA-256 of the file"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n")
    return file_digest(path)


def write_csv(path: Union[str, Path], header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(header))
        for row in rows:
            writer.writerow(["" if value is None else value for value in row])
    return file_digest(path)


def read_json(path: Union[str, Path]) -> Any:
    return json.loads(Path(path).read_text())


@dataclass(frozen=True)
class ArtifactTree:
    root: Path

    @classmethod
    def at(cls, root: Union[str, Path]) -> "ArtifactTree":
        return cls(Path(root))

    @property
    def atlas(self) -> Path:
        return self.root / "atlas.json"

    @property
    def metrics(self) -> Path:
        return self.root / "metrics"

    @property
    def metrics_index(self) -> Path:
        return self.metrics / "index.json"

    @property
    def geodesics(self) -> Path:
        return self.root / "geodesics"

    @property
    def reports(self) -> Path:
        return self.root / "reports"

    def report(self, name: str) -> Path:
        return self.reports / name

    def require(self, path: Path, stage: str) -> Path:
        """The artifact at path, or an error naming the stage that produces it"""
        if not path.exists():
            raise LabInputError(f"Missing artifact {path}: run the '{stage}' stage first")
        return path

    def digests(self, paths: Sequence[Path]) -> List[dict]:
        return [{"file": str(p.relative_to(self.root)), "sha256": file_digest(p)} for p in sorted(paths)]
