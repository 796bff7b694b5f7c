import hashlib
import json
import logging
from pathlib import Path

import numpy as np
from cachetools import LRUCache

logger = logging.getLogger(__name__)

type CacheKey = tuple[str, str]


def text_digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


class EmbeddingCache:
    """LRU cache of embeddings keyed by (embedder id, text sha256).

    When ``path`` is given, entries found there are loaded on construction
    and new entries are appended to it by ``flush``.
    """

    def __init__(self, maxsize: int = 100_000, path: Path | None = None):
        self._entries: LRUCache[CacheKey, tuple[float, ...]] = LRUCache(maxsize=maxsize)
        self._unsaved: list[CacheKey] = []
        self.path = path
        if path is not None and path.exists():
            self._load(path)

    def _load(self, path: Path) -> None:
        skipped = 0
        with path.open(encoding="utf-8") as handle:
            for line in handle:
                try:
                    record = json.loads(line)
                    key = (record["embedder"], record["sha256"])
                    self._entries[key] = tuple(float(x) for x in record["vector"])
                except (json.JSONDecodeError, KeyError, TypeError, ValueError):
                    skipped += 1
        if skipped:
            logger.warning("Skipped %d unreadable lines in embedding cache %s", skipped, path)
        logger.debug("Loaded %d cached embeddings from %s", len(self._entries), path)

    def get(self, embedder_id: str, text: str) -> np.ndarray | None:
        vector = self._entries.get((embedder_id, text_digest(text)))
        return None if vector is None else np.asarray(vector, dtype=np.float64)

    def put(self, embedder_id: str, text: str, vector: np.ndarray) -> None:
        key = (embedder_id, text_digest(text))
        if key not in self._entries:
            self._unsaved.append(key)
        self._entries[key] = tuple(float(x) for x in vector)

    def flush(self) -> int:
        """Append entries added since the last flush to ``path``."""
        if self.path is None or not self._unsaved:
            return 0
        self.path.parent.mkdir(parents=True, exist_ok=True)
        written = 0
        with self.path.open("a", encoding="utf-8") as handle:
            for key in self._unsaved:
                vector = self._entries.get(key)
                if vector is None:
                    continue  # evicted before flush
                embedder, digest = key
                record = {"embedder": embedder, "sha256": digest, "vector": list(vector)}
                handle.write(json.dumps(record) + "\n")
                written += 1
        self._unsaved.clear()
        return written

    def __len__(self) -> int:
        return len(self._entries)
