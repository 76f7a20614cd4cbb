"""Content-addressed JSON cache for expansion coefficients.

Requests are canonicalized (sorted-key JSON of their lossless encoding)
and hashed; each entry is one ``<sha256>.json`` file recording the
request, the precision it was computed at, and the value.  Lookups
asking for a tighter ``eps`` than the stored one miss, so tightening the
precision invalidates stale entries in place.  Writes go through a
temporary file in the cache directory followed by an atomic rename;
unreadable entries are ignored with a warning and recomputed.

Directory resolution: explicit argument > ``MJF_CACHE_DIR`` environment
variable > ``~/.cache/indef-theta-lab``.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
import warnings
from pathlib import Path

from .jsonio import to_jsonable

__all__ = ["ENV_VAR", "DEFAULT_CACHE_DIR", "resolve_cache_dir", "CoefficientCache"]

ENV_VAR = "MJF_CACHE_DIR"
DEFAULT_CACHE_DIR = Path.home() / ".cache" / "indef-theta-lab"


def resolve_cache_dir(explicit=None) -> Path:
    if explicit is not None:
        return Path(explicit)
    env = os.environ.get(ENV_VAR)
    if env:
        return Path(env)
    return DEFAULT_CACHE_DIR


class CoefficientCache:
    """Stores JSON-encodable values keyed by a canonical request hash."""

    def __init__(self, directory=None):
        self.directory = resolve_cache_dir(directory)

    def key(self, request: dict) -> str:
        canonical = json.dumps(
            to_jsonable(request), sort_keys=True, separators=(",", ":")
        )
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def path_for(self, request: dict) -> Path:
        return self.directory / f"{self.key(request)}.json"

    def lookup(self, request: dict, eps: float | None = None):
        """The stored value, or ``None`` on miss.

        ``eps=None`` demands an exact entry; a numeric ``eps`` accepts
        entries computed at least that tightly (stored exact entries
        always hit).
        """
        path = self.path_for(request)
        try:
            with open(path, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
        except FileNotFoundError:
            return None
        except (OSError, json.JSONDecodeError) as exc:
            warnings.warn(f"ignoring unreadable cache entry {path.name}: {exc}")
            return None
        if not isinstance(doc, dict) or doc.get("schema") != "cache/1" or "value" not in doc:
            warnings.warn(f"ignoring malformed cache entry {path.name}")
            return None
        stored_eps = doc.get("eps")
        if stored_eps is not None:
            if eps is None or float(stored_eps) > float(eps):
                return None
        return doc["value"]

    def store(self, request: dict, value, eps: float | None = None) -> Path:
        path = self.path_for(request)
        doc = {
            "schema": "cache/1",
            "key": path.stem,
            "eps": None if eps is None else float(eps),
            "request": to_jsonable(request),
            "value": to_jsonable(value),
        }
        self.directory.mkdir(parents=True, exist_ok=True)
        fd, tmp_name = tempfile.mkstemp(dir=self.directory, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                json.dump(doc, fh, indent=2)
                fh.write("\n")
            os.replace(tmp_name, path)
        except BaseException:
            try:
                os.unlink(tmp_name)
            except OSError:
                pass
            raise
        return path

    def get_or_compute(self, request: dict, compute, eps: float | None = None):
        """``(value, hit)``: the cached value when present, otherwise the
        freshly computed and stored one.  The value is always in its
        JSON-encoded form so hits and misses are interchangeable."""
        cached = self.lookup(request, eps)
        if cached is not None:
            return cached, True
        value = to_jsonable(compute())
        self.store(request, value, eps)
        return value, False

    def clear(self) -> int:
        if not self.directory.is_dir():
            return 0
        removed = 0
        for path in self.directory.glob("*.json"):
            try:
                path.unlink()
                removed += 1
            except OSError as exc:
                warnings.warn(f"could not remove cache entry {path.name}: {exc}")
        return removed

    def stats(self) -> dict:
        entries = 0
        total = 0
        if self.directory.is_dir():
            for path in sorted(self.directory.glob("*.json")):
                entries += 1
                total += path.stat().st_size
        return {"directory": str(self.directory), "entries": entries, "bytes": total}
