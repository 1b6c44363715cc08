"""Recorded responses keyed by (source_id, company_id).

Layout under the store root::

    <root>/manifest.json                      optional, see below
    <root>/<source_id>/<company_id><suffix>   one verbatim response body

The suffix is ``.json`` unless the adapter says otherwise. The manifest lists
keys and, per cell, whether the value is anchored to a published figure or
synthetic::

    {"label": "synthetic-constrained",
     "keys": [{"source_id": "...", "company_id": "...",
               "cells": {"<indicator_id>": "paper" | "synthetic"}}]}

When the same key is recorded twice the store either overwrites (default) or,
with ``on_conflict="version"``, renames the old file to ``<name>.<n>`` first.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path
from typing import Optional, Union

from ..errors import ConfigError, FixtureIOError

REPLAY = "replay"
RECORD = "record"
OVERWRITE = "overwrite"
VERSION = "version"


class FixtureStore:
    def __init__(self, root: Union[str, Path], mode: str = REPLAY, on_conflict: str = OVERWRITE):
        if mode not in (REPLAY, RECORD):
            raise ConfigError(f"unknown fixture mode {mode!r}")
        if on_conflict not in (OVERWRITE, VERSION):
            raise ConfigError(f"unknown on_conflict policy {on_conflict!r}")
        self.root = Path(root)
        self.mode = mode
        self.on_conflict = on_conflict
        self._write_lock = threading.Lock()

    def __repr__(self) -> str:
        return f"FixtureStore({str(self.root)!r}, mode={self.mode!r})"

    def path_for(self, source_id: str, company_id: str, suffix: str = ".json") -> Path:
        for part in (source_id, company_id):
            if not part or "/" in part or "\\" in part or part in (".", ".."):
                raise ConfigError(f"unsafe fixture key component {part!r}")
        return self.root / source_id / f"{company_id}{suffix}"

    def replay(self, source_id: str, company_id: str, suffix: str = ".json") -> Optional[bytes]:
        """Return the recorded payload, or None when no fixture exists."""
        path = self.path_for(source_id, company_id, suffix)
        try:
            return path.read_bytes()
        except FileNotFoundError:
            return None
        except OSError as exc:
            raise FixtureIOError(f"cannot read fixture {path}: {exc}") from exc

    def record(self, source_id: str, company_id: str, payload: bytes, suffix: str = ".json") -> Path:
        if self.mode != RECORD:
            raise ConfigError(f"{self!r} is not in record mode")
        path = self.path_for(source_id, company_id, suffix)
        with self._write_lock:
            try:
                path.parent.mkdir(parents=True, exist_ok=True)
                if path.exists() and self.on_conflict == VERSION:
                    n = 1
                    while path.with_name(f"{path.name}.{n}").exists():
                        n += 1
                    path.rename(path.with_name(f"{path.name}.{n}"))
                path.write_bytes(payload)
            except OSError as exc:
                raise FixtureIOError(f"cannot write fixture {path}: {exc}") from exc
        return path

    def keys(self) -> list[tuple[str, str]]:
        """All (source_id, company_id) pairs with a current fixture on disk."""
        if not self.root.is_dir():
            return []
        out = []
        for src in sorted(p for p in self.root.iterdir() if p.is_dir()):
            for f in sorted(src.iterdir()):
                if f.is_file() and f.suffix in (".json", ".html"):
                    out.append((src.name, f.stem))
        return out

    def manifest(self) -> Optional[dict]:
        path = self.root / "manifest.json"
        if not path.exists():
            return None
        try:
            return json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise FixtureIOError(f"cannot read manifest {path}: {exc}") from exc


def record_fixture(store: FixtureStore, source_id: str, company_id: str, payload: bytes,
                   suffix: str = ".json") -> Path:
    return store.record(source_id, company_id, payload, suffix)
