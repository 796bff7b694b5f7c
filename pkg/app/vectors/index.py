import logging
from collections.abc import Sequence

import numpy as np

from app.graph.store import GraphStore
from app.model.ledger import Phase
from app.model.models import ChunkId, EntityId, RelationId

from .constants import SCORE_DECIMALS
from .embedders import Embedder

logger = logging.getLogger(__name__)

type Payload = EntityId | RelationId | ChunkId


def payload_sort_key(payload: Payload) -> str:
    return str(payload)


class VectorIndex:
    """Exact cosine index over unit vectors; every query is a full scan.

    A payload may appear under several key texts (a relation once per
    global key); results report each payload once with its best score.
    """

    def __init__(
        self,
        dimension: int,
        payloads: Sequence[Payload] = (),
        key_texts: Sequence[str] = (),
        vectors: np.ndarray | None = None,
    ):
        if len(payloads) != len(key_texts):
            raise ValueError("payloads and key_texts must have the same length")
        self.dimension = dimension
        self.payloads = list(payloads)
        self.key_texts = list(key_texts)
        self.vectors = (
            np.zeros((0, dimension), dtype=np.float64) if vectors is None else vectors
        )
        if self.vectors.shape != (len(self.payloads), dimension):
            raise ValueError(
                f"vectors have shape {self.vectors.shape}, "
                f"expected ({len(self.payloads)}, {dimension})"
            )

    def __len__(self) -> int:
        return len(self.payloads)

    def top_k(self, query: np.ndarray, k: int) -> list[tuple[Payload, float]]:
        """Best ``k`` payloads by cosine similarity to a unit query vector.

        Ties are broken by ascending payload id.

        Raises:
            ValueError: If ``k`` < 1 or the query has the wrong dimension
        """
        if k < 1:
            raise ValueError(f"k must be positive, got {k}")
        if query.shape != (self.dimension,):
            raise ValueError(f"query has shape {query.shape}, expected ({self.dimension},)")
        if not self.payloads:
            return []

        scores = np.round(self.vectors @ query, SCORE_DECIMALS)
        best: dict[str, tuple[Payload, float]] = {}
        for payload, score in zip(self.payloads, scores.tolist(), strict=True):
            key = payload_sort_key(payload)
            if key not in best or score > best[key][1]:
                best[key] = (payload, score)

        ranked = sorted(best.values(), key=lambda item: (-item[1], payload_sort_key(item[0])))
        return ranked[:k]


class IndexSet:
    """The three indexes built from one store version."""

    def __init__(
        self,
        entities: VectorIndex,
        relations: VectorIndex,
        chunks: VectorIndex,
        version: int,
        embedder_id: str,
    ):
        self.entities = entities
        self.relations = relations
        self.chunks = chunks
        self.version = version
        self.embedder_id = embedder_id

    def __repr__(self) -> str:
        return (
            f"IndexSet(version={self.version}, entities={len(self.entities)}, "
            f"relations={len(self.relations)}, chunks={len(self.chunks)})"
        )


async def _build(
    embedder: Embedder, payloads: list[Payload], texts: list[str], phase: Phase
) -> VectorIndex:
    vectors = await embedder.embed_many(texts, phase=phase) if texts else None
    return VectorIndex(embedder.dimension, payloads, texts, vectors)


async def build_index(
    store: GraphStore, embedder: Embedder, phase: Phase = Phase.INDEX
) -> IndexSet:
    """Embed entity names, relation global keys and chunk texts of a store.

    Relations contribute one entry per global key; a relation that was never
    profiled falls back to its extracted keywords.

    Raises:
        RagError: EMBEDDING (retryable when the backend failure is)
    """
    graph = store.graph
    entity_ids = sorted(graph.entities)
    entities = await _build(
        embedder, list(entity_ids), [graph.entities[e].name for e in entity_ids], phase
    )

    relation_payloads: list[Payload] = []
    relation_texts: list[str] = []
    for rid in sorted(graph.relations):
        relation = graph.relations[rid]
        keys = relation.global_keys or relation.keywords
        if not keys:
            logger.warning("Relation %s has no keys and cannot be matched", rid)
        for key in keys:
            relation_payloads.append(rid)
            relation_texts.append(key)
    relations = await _build(embedder, relation_payloads, relation_texts, phase)

    chunk_ids = sorted(store.chunks)
    chunks = await _build(
        embedder, list(chunk_ids), [store.chunks[c].text for c in chunk_ids], phase
    )

    index = IndexSet(entities, relations, chunks, store.version, embedder.embedder_id)
    logger.info("Built %r", index)
    return index


async def search(
    index: VectorIndex,
    embedder: Embedder,
    query_text: str,
    k: int,
    *,
    phase: Phase = Phase.RETRIEVE,
) -> list[tuple[Payload, float]]:
    """Embed ``query_text`` and return its top ``k`` payloads."""
    if not len(index):
        return []
    return index.top_k(await embedder.embed(query_text, phase=phase), k)
