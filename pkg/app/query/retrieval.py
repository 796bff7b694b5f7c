import logging
from collections import Counter
from collections.abc import Iterable, Sequence

from app.core.errors import RagError, RagErrorKind
from app.graph.store import GraphStore
from app.model.ledger import Phase
from app.model.models import (
    ChunkId,
    EntityId,
    KnowledgeGraph,
    QueryKeywords,
    RelationId,
    subject_key,
)
from app.vectors.embedders import Embedder
from app.vectors.index import IndexSet, Payload, VectorIndex

from .models import QueryMode, RetrievalContext, RetrievedEntity, RetrievedRelation

logger = logging.getLogger(__name__)


class Seeds:
    """Directly retrieved entities and relations with their match scores."""

    def __init__(
        self,
        entities: dict[EntityId, float] | None = None,
        relations: dict[RelationId, float] | None = None,
    ):
        self.entities = entities or {}
        self.relations = relations or {}

    def add_entity(self, entity: EntityId, score: float) -> None:
        self.entities[entity] = max(score, self.entities.get(entity, score))

    def add_relation(self, relation: RelationId, score: float) -> None:
        self.relations[relation] = max(score, self.relations.get(relation, score))

    def union(self, other: "Seeds") -> "Seeds":
        merged = Seeds(dict(self.entities), dict(self.relations))
        for entity, score in other.entities.items():
            merged.add_entity(entity, score)
        for relation, score in other.relations.items():
            merged.add_relation(relation, score)
        return merged

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Seeds):
            return NotImplemented
        return self.entities == other.entities and self.relations == other.relations


def local_leg(graph: KnowledgeGraph, matches: dict[EntityId, float]) -> Seeds:
    """Matched entities plus the relations incident to them."""
    seeds = Seeds()
    for entity, score in matches.items():
        if entity not in graph.entities:
            continue
        seeds.add_entity(entity, score)
        for relation in graph.incident(entity):
            seeds.add_relation(relation, score)
    return seeds


def global_leg(graph: KnowledgeGraph, matches: dict[RelationId, float]) -> Seeds:
    """Matched relations plus both of their endpoints."""
    seeds = Seeds()
    for relation, score in matches.items():
        if relation not in graph.relations:
            continue
        seeds.add_relation(relation, score)
        for entity in relation.endpoints:
            seeds.add_entity(entity, score)
    return seeds


def one_hop(graph: KnowledgeGraph, seeds: Seeds) -> tuple[set[EntityId], set[RelationId]]:
    """Entities and relations added by one-hop expansion, seeds excluded.

    New entities are the neighbors of seed entities together with the
    endpoints of seed relations. New relations are the edges incident to a
    seed entity.
    """
    entities: set[EntityId] = set()
    relations: set[RelationId] = set()
    for entity in seeds.entities:
        for relation in graph.incident(entity):
            entities.add(relation.other(entity))
            relations.add(relation)
    for relation in seeds.relations:
        entities.update(relation.endpoints)
    return entities - seeds.entities.keys(), relations - seeds.relations.keys()


def rank_chunks(
    graph: KnowledgeGraph,
    entities: Iterable[EntityId],
    relations: Iterable[RelationId],
) -> list[ChunkId]:
    """Cited chunks, most-referenced first, then by id."""
    references: Counter[ChunkId] = Counter()
    for entity in entities:
        references.update(graph.entities[entity].source_chunks)
    for relation in relations:
        references.update(graph.relations[relation].source_chunks)
    return sorted(references, key=lambda chunk: (-references[chunk], chunk))


async def match_keywords(
    index: VectorIndex,
    embedder: Embedder,
    keywords: Sequence[str],
    k: int,
) -> dict[Payload, float]:
    """Top ``k`` payloads per keyword, unioned with their best score."""
    if not keywords or not len(index):
        return {}
    vectors = await embedder.embed_many(list(keywords), phase=Phase.RETRIEVE)
    matches: dict[Payload, float] = {}
    for vector in vectors:
        for payload, score in index.top_k(vector, k):
            matches[payload] = max(score, matches.get(payload, score))
    return matches


async def collect_seeds(
    store: GraphStore,
    indexes: IndexSet,
    embedder: Embedder,
    keywords: QueryKeywords,
    mode: QueryMode,
    k: int,
) -> Seeds:
    seeds = Seeds()
    if mode.uses_local_leg:
        matches = await match_keywords(indexes.entities, embedder, keywords.low, k)
        seeds = seeds.union(local_leg(store.graph, matches))
    if mode.uses_global_leg:
        matches = await match_keywords(indexes.relations, embedder, keywords.high, k)
        seeds = seeds.union(global_leg(store.graph, matches))
    return seeds


def check_fresh(store: GraphStore, indexes: IndexSet) -> None:
    if indexes.version != store.version:
        raise RagError(
            message=(
                f"Index was built from store version {indexes.version}, "
                f"store is at {store.version}"
            ),
            kind=RagErrorKind.STALE_INDEX,
        )


def _by_score[T](scores: dict[T, float]) -> list[T]:
    return sorted(scores, key=lambda item: (-scores[item], str(item)))


async def retrieve(
    store: GraphStore,
    indexes: IndexSet,
    embedder: Embedder,
    keywords: QueryKeywords,
    mode: QueryMode,
    k: int,
    *,
    query: str = "",
    budget_tokens: int = 8000,
) -> RetrievalContext:
    """Select the entities, relations and chunks that answer a query.

    Graph modes rank seeds by match score and put one-hop expansion items
    after them, most connected first. Naive mode matches ``query`` against
    the chunk index only.

    Raises:
        RagError: STALE_INDEX when ``indexes`` were built from another store
            version
    """
    check_fresh(store, indexes)
    context = RetrievalContext(
        budget_tokens=budget_tokens, keywords=keywords, mode=mode, version=store.version
    )

    if not mode.uses_graph:
        matches = await match_keywords(indexes.chunks, embedder, [query] if query else [], k)
        context.chunks = [store.chunks[c] for c in _by_score(matches)]
        return context

    graph = store.graph
    seeds = await collect_seeds(store, indexes, embedder, keywords, mode, k)
    extra_entities, extra_relations = one_hop(graph, seeds)

    entity_order = _by_score(seeds.entities) + sorted(
        extra_entities, key=lambda e: (-graph.degree(e), e)
    )
    relation_order = _by_score(seeds.relations) + sorted(
        extra_relations, key=lambda r: (-graph.edge_degree(r), r)
    )
    context.entities = [
        RetrievedEntity(
            entity=graph.entities[e],
            profile=store.kv.get(subject_key(e)),
            score=seeds.entities.get(e),
        )
        for e in entity_order
    ]
    context.relations = [
        RetrievedRelation(
            relation=graph.relations[r],
            profile=store.kv.get(subject_key(r)),
            score=seeds.relations.get(r),
        )
        for r in relation_order
    ]
    if mode.include_origin_text:
        cited = rank_chunks(graph, entity_order, relation_order)
        context.chunks = [store.chunks[c] for c in cited if c in store.chunks]

    logger.info(
        "Retrieved %d entities (%d seeds), %d relations (%d seeds), %d chunks",
        len(context.entities),
        len(seeds.entities),
        len(context.relations),
        len(seeds.relations),
        len(context.chunks),
    )
    return context
