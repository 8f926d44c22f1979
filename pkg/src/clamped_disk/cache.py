"""On-disk result cache.

Each entry is a JSON file named by the SHA-256 of its key.  The file is
self-describing::

    {"format": "clamped-disk-cache/1",
     "version": "<package version>",
     "key": {"op": ..., ...exact parameters...},
     "payload": <records>,
     "checksum": "<sha256 of the canonical payload JSON>"}

A version mismatch is a miss.  An unreadable or inconsistent file is
reported with a warning, recomputed and overwritten.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Any, Callable

from . import __version__

FORMAT = "clamped-disk-cache/1"

log = logging.getLogger(__name__)


def _canonical(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _digest(obj: Any) -> str:
    return hashlib.sha256(_canonical(obj).encode()).hexdigest()


class ResultCache:
    def __init__(self, directory: str | os.PathLike, version: str = __version__):
        self.dir = Path(directory)
        self.version = version
        self.hits = 0
        self.misses = 0

    def path_for(self, key: dict) -> Path:
        return self.dir / f"{_digest({'key': key, 'version': self.version})}.json"

    def load(self, key: dict) -> Any | None:
        path = self.path_for(key)
        if not path.exists():
            return None
        try:
            entry = json.loads(path.read_text())
            if entry.get("format") != FORMAT or entry.get("version") != self.version:
                return None
            if entry.get("key") != key:
                raise ValueError("key mismatch")
            if entry.get("checksum") != _digest(entry["payload"]):
                raise ValueError("checksum mismatch")
        except (ValueError, KeyError, TypeError, AttributeError) as exc:
            log.warning("corrupt cache entry %s (%s); recomputing", path.name, exc)
            return None
        return entry["payload"]

    def store(self, key: dict, payload: Any) -> None:
        self.dir.mkdir(parents=True, exist_ok=True)
        entry = {
            "format": FORMAT,
            "version": self.version,
            "key": key,
            "payload": payload,
            "checksum": _digest(payload),
        }
        path = self.path_for(key)
        fd, tmp = tempfile.mkstemp(dir=self.dir, suffix=".tmp")
        with os.fdopen(fd, "w") as fh:
            # key order inside the payload is part of the output, so no sort_keys here
            fh.write(json.dumps(entry, separators=(",", ":")))
        os.replace(tmp, path)

    def get_or_compute(self, key: dict, compute: Callable[[], Any]) -> Any:
        payload = self.load(key)
        if payload is not None:
            self.hits += 1
            return payload
        self.misses += 1
        payload = compute()
        self.store(key, payload)
        return payload
