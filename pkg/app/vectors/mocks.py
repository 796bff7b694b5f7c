from collections.abc import Sequence

import numpy as np

from app.ingest.tokens import TokenCounter
from app.model.ledger import CostLedger

from .cache import EmbeddingCache
from .embedders import Embedder


class VocabularyEmbedder(Embedder):
    """One-hot embedder over a fixed vocabulary.

    A text equal to a vocabulary term (case-folded, whitespace-collapsed)
    maps to that term's axis; anything else is the zero vector. Exact
    matches score 1 and everything else 0, with no hash collisions.
    """

    def __init__(
        self,
        ledger: CostLedger,
        vocabulary: Sequence[str],
        cache: EmbeddingCache | None = None,
        counter: TokenCounter | None = None,
    ):
        self.vocabulary = {self._key(term): i for i, term in enumerate(vocabulary)}
        super().__init__(ledger, max(len(self.vocabulary), 1), cache, counter)

    @staticmethod
    def _key(text: str) -> str:
        return " ".join(text.casefold().split())

    @property
    def embedder_id(self) -> str:
        return f"vocabulary:{self.dimension}:{','.join(self.vocabulary)}"

    async def _embed_batch(self, texts: list[str]) -> tuple[np.ndarray, int]:
        vectors = np.zeros((len(texts), self.dimension), dtype=np.float64)
        for row, text in enumerate(texts):
            axis = self.vocabulary.get(self._key(text))
            if axis is not None:
                vectors[row, axis] = 1.0
        return vectors, sum(self.counter.count(text) for text in texts)
