"""File-backed snapshot store with an atomically swapped CURRENT pointer.

Snapshots live under ``<root>/<snapshot_id>.json``; the pointer file
``<root>/CURRENT`` holds the published id.  Both are written to a
temporary file first and moved into place with ``os.replace``, so readers
always observe either the old or the new state, never a mixture.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

from .composer import MapSnapshot, snapshot_from_dict, snapshot_to_dict

CURRENT_POINTER = "CURRENT"
INPUTS_DIR = "inputs"


class SnapshotStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def snapshot_path(self, snapshot_id: str) -> Path:
        return self.root / f"{snapshot_id}.json"

    @property
    def inputs_dir(self) -> Path:
        return self.root / INPUTS_DIR

    def save(self, snapshot: MapSnapshot) -> Path:
        """Persist a snapshot document; idempotent for identical content."""
        path = self.snapshot_path(snapshot.snapshot_id)
        payload = json.dumps(
            snapshot_to_dict(snapshot), ensure_ascii=False, indent=2, sort_keys=True
        )
        self._atomic_write(path, payload + "\n")
        return path

    def publish(self, snapshot_id: str) -> None:
        """Atomically point CURRENT at an already-saved snapshot."""
        if not self.snapshot_path(snapshot_id).exists():
            raise FileNotFoundError(f"snapshot '{snapshot_id}' is not in the store")
        self._atomic_write(self.root / CURRENT_POINTER, snapshot_id + "\n")

    def current_id(self) -> str | None:
        pointer = self.root / CURRENT_POINTER
        try:
            content = pointer.read_text(encoding="utf-8").strip()
        except FileNotFoundError:
            return None
        return content or None

    def load(self, snapshot_id: str) -> MapSnapshot:
        with self.snapshot_path(snapshot_id).open(encoding="utf-8") as fh:
            return snapshot_from_dict(json.load(fh))

    def load_current(self) -> MapSnapshot | None:
        snapshot_id = self.current_id()
        return self.load(snapshot_id) if snapshot_id else None

    def _atomic_write(self, path: Path, content: str) -> None:
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_text(content, encoding="utf-8")
        os.replace(tmp, path)
