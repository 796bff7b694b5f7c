import hashlib
import logging
import re
from abc import ABC, abstractmethod
from collections.abc import Sequence
from itertools import batched

import numpy as np

from app.core import metrics
from app.core.errors import RagError, RagErrorKind
from app.ingest.tokens import TokenCounter, get_counter
from app.model.ledger import CostLedger, Phase

from .cache import EmbeddingCache
from .constants import EMBEDDING_BATCH_SIZE, HASH_DIGEST_SIZE

logger = logging.getLogger(__name__)

_TOKEN = re.compile(r"\w+")


def unit_normalize(vectors: np.ndarray) -> np.ndarray:
    """Scale rows to unit length; all-zero rows stay zero."""
    norms = np.linalg.norm(vectors, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    return vectors / norms


class Embedder(ABC):
    """Abstract base class for text embedders.

    ``embed_many`` serves repeated texts from the cache, sends the rest in
    batches to ``_embed_batch``, unit-normalizes the vectors and charges the
    reported tokens to the ledger.
    """

    def __init__(
        self,
        ledger: CostLedger,
        dimension: int,
        cache: EmbeddingCache | None = None,
        counter: TokenCounter | None = None,
    ):
        self.ledger = ledger
        self.dimension = dimension
        self.cache = cache or EmbeddingCache()
        self.counter = counter or get_counter()

    @property
    @abstractmethod
    def embedder_id(self) -> str:
        """Stable identifier, part of every cache key.

        Returns:
            Embedder name including anything that changes its vectors
        """

    @abstractmethod
    async def _embed_batch(self, texts: list[str]) -> tuple[np.ndarray, int]:
        """Embed one batch of distinct texts.

        Args:
            texts: Texts to embed

        Returns:
            A ``(len(texts), dimension)`` array and the tokens consumed

        Raises:
            RagError: EMBEDDING when the backend fails
        """

    async def embed(self, text: str, *, phase: Phase) -> np.ndarray:
        return (await self.embed_many([text], phase=phase))[0]

    async def embed_many(self, texts: Sequence[str], *, phase: Phase) -> np.ndarray:
        """Embed texts in order.

        Args:
            texts: Texts to embed; duplicates are embedded once
            phase: Ledger phase charged for the tokens

        Returns:
            A ``(len(texts), dimension)`` array of unit vectors
        """
        result = np.zeros((len(texts), self.dimension), dtype=np.float64)
        misses: dict[str, list[int]] = {}
        for i, text in enumerate(texts):
            cached = self.cache.get(self.embedder_id, text)
            if cached is not None and cached.shape == (self.dimension,):
                result[i] = cached
            else:
                misses.setdefault(text, []).append(i)

        for batch in batched(misses, EMBEDDING_BATCH_SIZE):
            vectors, tokens = await self._embed_batch(list(batch))
            if vectors.shape != (len(batch), self.dimension):
                raise RagError(
                    message=(
                        f"{self.embedder_id} returned vectors of shape {vectors.shape}, "
                        f"expected ({len(batch)}, {self.dimension})"
                    ),
                    kind=RagErrorKind.EMBEDDING,
                )
            vectors = unit_normalize(vectors.astype(np.float64))
            self.ledger.record_embedding(phase, tokens)
            metrics.record_embedding_tokens(phase.value, tokens)
            for text, vector in zip(batch, vectors, strict=True):
                self.cache.put(self.embedder_id, text, vector)
                result[misses[text]] = vector

        if misses:
            logger.debug("Embedded %d new texts with %s", len(misses), self.embedder_id)
        return result


class HashingEmbedder(Embedder):
    """Deterministic bag-of-words embedder.

    Each case-folded word is hashed into one of ``dimension`` buckets; texts
    sharing words get positive cosine similarity.
    """

    def __init__(
        self,
        ledger: CostLedger,
        dimension: int = 128,
        cache: EmbeddingCache | None = None,
        counter: TokenCounter | None = None,
    ):
        super().__init__(ledger, dimension, cache, counter)

    @property
    def embedder_id(self) -> str:
        return f"hashing:{self.dimension}"

    def bucket(self, word: str) -> int:
        digest = hashlib.blake2b(word.encode("utf-8"), digest_size=HASH_DIGEST_SIZE).digest()
        return int.from_bytes(digest, "big") % self.dimension

    def vectorize(self, text: str) -> np.ndarray:
        vector = np.zeros(self.dimension, dtype=np.float64)
        for word in _TOKEN.findall(text.casefold()):
            vector[self.bucket(word)] += 1.0
        return vector

    async def _embed_batch(self, texts: list[str]) -> tuple[np.ndarray, int]:
        vectors = np.stack([self.vectorize(text) for text in texts])
        return vectors, sum(self.counter.count(text) for text in texts)
