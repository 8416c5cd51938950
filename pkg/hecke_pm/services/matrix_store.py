"""On-disk store for Hecke matrices.

Matrices are kept per basis digest, one file per operator tag, in the row-major debug
format of ``IntMatrix.dump``. The store never decides what to compute; the in-memory
``HeckeMatrixCache`` consults it on a miss and writes through on insert.
"""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from hecke_pm.linalg import IntMatrix

logger = logging.getLogger(__name__)


@dataclass
class StoredMatrix:
    """A matrix read back from the store."""

    digest: str = ""
    tag: str = ""
    matrix: Optional[IntMatrix] = None


class MatrixStore:
    """Directory-backed persistence for Hecke matrices."""

    def __init__(self, root: Path | str):
        self.root = Path(root)
        self._lock = threading.Lock()

    def _ensure_container(self, digest: str) -> Path:
        """Return the per-basis directory, creating it on first use."""

        container = self.root / digest[:16]
        container.mkdir(parents=True, exist_ok=True)
        return container

    def _path(self, digest: str, tag: str) -> Path:
        return self._ensure_container(digest) / f"{tag}.mat"

    def get_matrix(self, digest: str, tag: str) -> Optional[StoredMatrix]:
        path = self._path(digest, tag)
        if not path.exists():
            return None
        try:
            matrix = IntMatrix.load(path.read_text())
        except (ValueError, IndexError) as exc:
            logger.warning("ignoring unreadable matrix file %s: %s", path, exc)
            return None
        logger.debug("loaded %s for basis %s from %s", tag, digest[:12], path)
        return StoredMatrix(digest=digest, tag=tag, matrix=matrix)

    def save_matrix(self, digest: str, tag: str, matrix: IntMatrix) -> StoredMatrix:
        path = self._path(digest, tag)
        with self._lock:
            tmp = path.with_suffix(".tmp")
            tmp.write_text(matrix.dump())
            tmp.replace(path)
        logger.debug("stored %s for basis %s at %s", tag, digest[:12], path)
        return StoredMatrix(digest=digest, tag=tag, matrix=matrix)
