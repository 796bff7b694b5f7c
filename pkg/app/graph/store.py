import logging
from collections.abc import Awaitable, Callable, Iterable, Mapping, Sequence

from pydantic import BaseModel, ConfigDict

from app.model.models import (
    Chunk,
    ChunkId,
    Entity,
    KnowledgeGraph,
    KvRecord,
    Relation,
    subject_key,
)

from .dedupe import merge_entity, merge_relation

logger = logging.getLogger(__name__)

type GraphItem = Entity | Relation
type Profiler = Callable[[Sequence[GraphItem]], Awaitable[list[KvRecord]]]


class GraphStats(BaseModel):
    version: int
    entities: int
    relations: int
    profiles: int
    chunks: int
    documents: int
    stale_profiles: int


class GraphStore:
    """One committed version of the index: graph, profiles and chunk texts.

    Instances are never mutated after construction; ``merge_incremental``
    builds the next version next to the current one, so readers holding an
    older store keep a consistent snapshot.
    """

    def __init__(
        self,
        graph: KnowledgeGraph | None = None,
        kv: Mapping[str, KvRecord] | None = None,
        chunks: Mapping[ChunkId, Chunk] | None = None,
        version: int = 0,
    ):
        self.graph = graph or KnowledgeGraph()
        self.kv: dict[str, KvRecord] = dict(kv or {})
        self.chunks: dict[ChunkId, Chunk] = dict(chunks or {})
        self.version = version

    def profile_of(self, item: GraphItem) -> KvRecord | None:
        return self.kv.get(subject_key(item.id))

    def stale_items(self) -> list[GraphItem]:
        """Entities and relations without an up-to-date profile."""
        items: list[GraphItem] = [
            *(self.graph.entities[k] for k in sorted(self.graph.entities)),
            *(self.graph.relations[k] for k in sorted(self.graph.relations)),
        ]
        return [
            item
            for item in items
            if (record := self.profile_of(item)) is None
            or record.fingerprint != item.content_fingerprint()
        ]

    def stats(self) -> "GraphStats":
        return GraphStats(
            version=self.version,
            entities=len(self.graph.entities),
            relations=len(self.graph.relations),
            profiles=len(self.kv),
            chunks=len(self.chunks),
            documents=len({chunk.doc for chunk in self.chunks}),
            stale_profiles=len(self.stale_items()),
        )

    def consistency_errors(self) -> list[str]:
        errors = self.graph.consistency_errors()
        items: Iterable[GraphItem] = (
            *self.graph.entities.values(),
            *self.graph.relations.values(),
        )
        for item in items:
            missing = [str(c) for c in sorted(item.source_chunks) if c not in self.chunks]
            if missing:
                errors.append(f"{item.id} cites unknown chunks {missing}")
        return errors

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GraphStore):
            return NotImplemented
        return (
            self.version == other.version
            and self.graph == other.graph
            and self.kv == other.kv
            and self.chunks == other.chunks
        )

    def __repr__(self) -> str:
        return (
            f"GraphStore(version={self.version}, entities={len(self.graph.entities)}, "
            f"relations={len(self.graph.relations)}, chunks={len(self.chunks)})"
        )


class GraphDelta(BaseModel):
    """What one indexing batch adds: a small graph plus its chunks."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    graph: KnowledgeGraph
    chunks: list[Chunk] = []
    kv: list[KvRecord] = []

    def is_empty(self) -> bool:
        return not self.graph.entities and not self.graph.relations and not self.chunks


def _with_global_keys(relation: Relation, record: KvRecord | None) -> Relation:
    keys = record.keys if record else ()
    if relation.global_keys == keys:
        return relation
    return relation.model_copy(update={"global_keys": keys})


async def merge_incremental(
    store: GraphStore,
    delta: GraphDelta,
    profiler: Profiler | None = None,
) -> GraphStore:
    """Union a delta into the store and return the next version.

    Items whose content fingerprint changed (or that are new) are handed
    to ``profiler``; every other profile is reused untouched. Relations
    pick up their global keys from their profiles.

    Args:
        store: Current committed version
        delta: Batch graph, chunks and any profiles computed for it
        profiler: Async callable producing profiles for the given items

    Returns:
        A new store with ``version == store.version + 1``
    """
    graph = store.graph.copy()
    for key in sorted(delta.graph.entities):
        incoming = delta.graph.entities[key]
        current = graph.entities.get(key)
        graph.put_entity(merge_entity(current, incoming) if current else incoming)
    for key in sorted(delta.graph.relations):
        incoming = delta.graph.relations[key]
        current = graph.relations.get(key)
        graph.put_relation(merge_relation(current, incoming) if current else incoming)

    chunks = dict(store.chunks)
    chunks.update((chunk.id, chunk) for chunk in delta.chunks)
    kv = dict(store.kv)
    kv.update((record.key, record) for record in delta.kv)

    merged = GraphStore(graph=graph, kv=kv, chunks=chunks, version=store.version + 1)
    stale = merged.stale_items()
    if stale and profiler is not None:
        records = await profiler(stale)
        merged.kv.update((record.key, record) for record in records)
        logger.info("Profiled %d new or changed graph items", len(records))
    elif stale:
        logger.warning("%d graph items left without an up-to-date profile", len(stale))

    for key, relation in graph.relations.items():
        graph.relations[key] = _with_global_keys(relation, merged.kv.get(subject_key(key)))
    return merged
