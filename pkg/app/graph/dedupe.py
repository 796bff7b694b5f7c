import logging
from collections.abc import Sequence
from typing import NamedTuple

from pydantic import BaseModel

from app.core import metrics
from app.extract.models import ExtractionResult, RawEntity, RawRelation
from app.model.models import (
    ChunkId,
    Entity,
    EntityId,
    KnowledgeGraph,
    Relation,
    RelationId,
    merge_fragments,
    merge_keywords,
    normalize_entity_name,
)

logger = logging.getLogger(__name__)


class QuarantinedRelation(BaseModel):
    chunk: ChunkId
    source: str
    target: str
    missing: tuple[EntityId, ...]


class DedupeResult(NamedTuple):
    graph: KnowledgeGraph
    quarantined: list[QuarantinedRelation]


def merge_entity(existing: Entity, incoming: Entity) -> Entity:
    """Union two records of the same entity; name and type are first-seen."""
    return existing.model_copy(
        update={
            "description_fragments": merge_fragments(
                existing.description_fragments, incoming.description_fragments
            ),
            "source_chunks": existing.source_chunks | incoming.source_chunks,
        }
    )


def merge_relation(existing: Relation, incoming: Relation) -> Relation:
    """Union two records of the same edge; strength is the maximum."""
    return existing.model_copy(
        update={
            "description_fragments": merge_fragments(
                existing.description_fragments, incoming.description_fragments
            ),
            "strength": max(existing.strength, incoming.strength),
            "keywords": merge_keywords(existing.keywords, incoming.keywords),
            "source_chunks": existing.source_chunks | incoming.source_chunks,
        }
    )


def _entity_from_raw(raw: RawEntity, chunk: ChunkId) -> Entity:
    name = " ".join(raw.name.split())
    return Entity(
        id=normalize_entity_name(name),
        name=name,
        entity_type=raw.entity_type,
        description_fragments=merge_fragments((), (raw.description,)),
        source_chunks=frozenset({chunk}),
    )


def _relation_from_raw(raw: RawRelation, chunk: ChunkId) -> Relation:
    source = normalize_entity_name(raw.source)
    target = normalize_entity_name(raw.target)
    return Relation(
        id=RelationId.of(source, target),
        source=source,
        target=target,
        description_fragments=merge_fragments((), (raw.description,)),
        strength=raw.strength,
        keywords=merge_keywords((), raw.keywords),
        source_chunks=frozenset({chunk}),
    )


def _ordered(
    results: Sequence[ExtractionResult],
) -> list[tuple[ChunkId, ExtractionResult]]:
    ordered = []
    for result in results:
        if result.chunk is None:
            raise ValueError("Extraction results must carry a chunk id to be merged")
        ordered.append((result.chunk, result))
    # stable: results of the same chunk keep their relative order
    return sorted(ordered, key=lambda item: item[0])


def dedupe_merge(
    results: Sequence[ExtractionResult],
    existing: KnowledgeGraph | None = None,
) -> DedupeResult:
    """Merge one batch of extraction results into a deduplicated graph.

    Entities merge by normalized name and relations by endpoint pair, in
    chunk order. A relation whose endpoint is neither in the batch nor in
    ``existing`` is quarantined. An endpoint known only to ``existing`` is
    copied into the batch graph so the batch is self-contained.

    Args:
        results: Extraction results of one batch
        existing: Graph the batch will be merged into, if any

    Returns:
        The batch graph and the quarantined relations
    """
    existing = existing or KnowledgeGraph()
    entities: dict[EntityId, Entity] = {}
    relations: dict[RelationId, Relation] = {}
    pending: list[tuple[ChunkId, RawRelation, Relation]] = []

    for chunk, result in _ordered(results):
        for raw in result.entities:
            entity = _entity_from_raw(raw, chunk)
            current = entities.get(entity.id)
            entities[entity.id] = merge_entity(current, entity) if current else entity
        for raw in result.relations:
            if normalize_entity_name(raw.source) == normalize_entity_name(raw.target):
                continue  # self-loops never become edges
            pending.append((chunk, raw, _relation_from_raw(raw, chunk)))

    quarantined: list[QuarantinedRelation] = []
    for chunk, raw, relation in pending:
        missing = tuple(
            endpoint
            for endpoint in relation.id.endpoints
            if endpoint not in entities and endpoint not in existing.entities
        )
        if missing:
            quarantined.append(
                QuarantinedRelation(
                    chunk=chunk, source=raw.source, target=raw.target, missing=missing
                )
            )
            continue
        for endpoint in relation.id.endpoints:
            if endpoint not in entities:
                entities[endpoint] = existing.entities[endpoint]
        current = relations.get(relation.id)
        relations[relation.id] = merge_relation(current, relation) if current else relation

    if quarantined:
        metrics.record_quarantined_relations(len(quarantined))
        logger.warning("Quarantined %d relations with unknown endpoints", len(quarantined))

    graph = KnowledgeGraph(
        entities=(entities[k] for k in sorted(entities)),
        relations=(relations[k] for k in sorted(relations)),
    )
    return DedupeResult(graph=graph, quarantined=quarantined)
