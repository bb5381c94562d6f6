"""File-backed workspace for user architectures and saved experiment results.

One JSON file per entry plus an index file, all inside a single directory -
inspectable and diff-able. Writes are content-addressed: re-saving identical
content is a no-op, so concurrent identical saves converge on one entry.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import tempfile
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from . import catalog
from .catalog import CatalogEntry, CatalogError

__all__ = ["Workspace", "WorkspaceError", "ENV_WORKSPACE"]

ENV_WORKSPACE = "DSE_WORKSPACE"
_NAME_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._-]*$")


class WorkspaceError(ValueError):
    pass


@dataclass(frozen=True)
class WorkspaceRecord:
    name: str
    kind: str  # architecture | report
    path: str
    content_hash: str
    created_at: str


class Workspace:
    """Directory of saved entries. A single writer lock serializes writes;
    reads need no synchronization (files are written atomically)."""

    def __init__(self, root: str | Path | None = None):
        if root is None:
            root = os.environ.get(ENV_WORKSPACE, "./workspace")
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._index_path = self.root / "index.json"
        self._lock = threading.Lock()

    # -- index ------------------------------------------------------------

    def _read_index(self) -> dict[str, dict]:
        if not self._index_path.exists():
            return {}
        try:
            return json.loads(self._index_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise WorkspaceError(f"corrupt workspace index {self._index_path}: {e}") from None

    def _write_index(self, index: dict[str, dict]) -> None:
        payload = json.dumps(dict(sorted(index.items())), indent=2) + "\n"
        fd, tmp = tempfile.mkstemp(dir=self.root, prefix=".index-")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as f:
                f.write(payload)
            os.replace(tmp, self._index_path)
        finally:
            if os.path.exists(tmp):
                os.unlink(tmp)

    # -- entries ----------------------------------------------------------

    @staticmethod
    def _check_name(name: str) -> None:
        if not _NAME_RE.match(name):
            raise WorkspaceError(
                f"invalid entry name {name!r}: use letters, digits, '.', '_', '-'"
            )

    def _store(self, name: str, kind: str, filename: str, payload: str) -> WorkspaceRecord:
        self._check_name(name)
        digest = hashlib.sha256(payload.encode("utf-8")).hexdigest()
        with self._lock:
            index = self._read_index()
            existing = index.get(name)
            if existing and existing["content_hash"] == digest:
                return WorkspaceRecord(**existing)
            path = self.root / filename
            fd, tmp = tempfile.mkstemp(dir=self.root, prefix=f".{kind}-")
            try:
                with os.fdopen(fd, "w", encoding="utf-8") as f:
                    f.write(payload)
                os.replace(tmp, path)
            finally:
                if os.path.exists(tmp):
                    os.unlink(tmp)
            record = WorkspaceRecord(
                name=name,
                kind=kind,
                path=filename,
                content_hash=digest,
                created_at=datetime.now(timezone.utc).isoformat(),
            )
            index[name] = record.__dict__
            self._write_index(index)
            return record

    def save_architecture(self, entry: CatalogEntry, name: str | None = None) -> WorkspaceRecord:
        name = name or entry.name
        return self._store(name, "architecture", f"{name}{catalog.FILE_EXTENSION}",
                           catalog.dumps(entry))

    def save_report(self, name: str, document: dict) -> WorkspaceRecord:
        payload = json.dumps(document, indent=2, sort_keys=True) + "\n"
        return self._store(name, "report", f"{name}.report.json", payload)

    def list(self, kind: str | None = None) -> list[WorkspaceRecord]:
        index = self._read_index()
        records = [WorkspaceRecord(**v) for v in index.values()]
        if kind is not None:
            records = [r for r in records if r.kind == kind]
        return sorted(records, key=lambda r: r.name)

    def __contains__(self, name: str) -> bool:
        return name in self._read_index()

    def load_architecture(self, name: str) -> CatalogEntry:
        index = self._read_index()
        record = index.get(name)
        if record is None or record["kind"] != "architecture":
            raise KeyError(name)
        try:
            return catalog.load(self.root / record["path"])
        except CatalogError as e:
            raise WorkspaceError(str(e)) from None

    def resolve(self, name: str) -> CatalogEntry:
        """Builtin catalog first, then workspace entries."""
        try:
            return catalog.builtin(name)
        except KeyError:
            pass
        try:
            return self.load_architecture(name)
        except KeyError:
            known = ", ".join(catalog.builtin_names() + tuple(r.name for r in self.list("architecture")))
            raise KeyError(f"unknown architecture {name!r}; known: {known}") from None
