from collections import Counter
from collections.abc import Sequence

import pytest

from app.model.models import (
    Chunk,
    ChunkId,
    Entity,
    KnowledgeGraph,
    KvRecord,
    Relation,
    RelationId,
)

from .store import GraphDelta, GraphItem, GraphStore, merge_incremental


class RecordingProfiler:
    def __init__(self):
        self.calls: list[list[GraphItem]] = []

    async def __call__(self, items: Sequence[GraphItem]) -> list[KvRecord]:
        self.calls.append(list(items))
        return [
            KvRecord(
                keys=(item.name,) if isinstance(item, Entity) else ("theme",),
                value=f"profile of {item.id}",
                subject=item.id,
                fingerprint=item.content_fingerprint(),
            )
            for item in items
        ]


def cid(doc: str, index: int = 0) -> ChunkId:
    return ChunkId(doc=doc, index=index)


def entity(name: str, doc: str, *fragments: str) -> Entity:
    return Entity(
        id=name.lower(),
        name=name,
        entity_type="concept",
        description_fragments=fragments,
        source_chunks={cid(doc)},
    )


def relation(a: str, b: str, doc: str, *fragments: str) -> Relation:
    return Relation(
        id=RelationId.of(a, b),
        source=a,
        target=b,
        description_fragments=fragments,
        source_chunks={cid(doc)},
    )


def delta(*items: Entity | Relation) -> GraphDelta:
    entities = [i for i in items if isinstance(i, Entity)]
    relations = [i for i in items if isinstance(i, Relation)]
    docs = {c.doc for i in items for c in i.source_chunks}
    chunks = [Chunk.create(doc=d, index=0, text=f"text of {d}", token_count=3) for d in docs]
    return GraphDelta(graph=KnowledgeGraph(entities, relations), chunks=chunks)


def fragment_multiset(store: GraphStore) -> Counter:
    items = [*store.graph.entities.values(), *store.graph.relations.values()]
    return Counter((str(i.id), f) for i in items for f in i.description_fragments)


@pytest.mark.asyncio
async def test_empty_delta_only_bumps_version():
    profiler = RecordingProfiler()
    store = await merge_incremental(GraphStore(), delta(entity("A", "d1", "x")), profiler)

    merged = await merge_incremental(store, delta(), profiler)

    assert merged.version == store.version + 1
    assert merged.graph == store.graph
    assert merged.kv == store.kv
    assert len(profiler.calls) == 1


@pytest.mark.asyncio
async def test_disjoint_graphs_add_up():
    first = delta(entity("a", "d1"), entity("b", "d1"), relation("a", "b", "d1", "ab"))
    second = delta(
        entity("c", "d2"),
        entity("d", "d2"),
        entity("e", "d2"),
        relation("c", "d", "d2"),
        relation("d", "e", "d2"),
    )

    store = await merge_incremental(GraphStore(), first)
    store = await merge_incremental(store, second)

    assert (len(store.graph.entities), len(store.graph.relations)) == (5, 3)
    assert store.version == 2


@pytest.mark.asyncio
async def test_collisions_union_fragments_and_chunks():
    store = await merge_incremental(GraphStore(), delta(entity("A", "d1", "one")))

    store = await merge_incremental(store, delta(entity("A", "d2", "two")))

    merged = store.graph.entities["a"]
    assert merged.description_fragments == ("one", "two")
    assert merged.source_chunks == {cid("d1"), cid("d2")}
    assert store.consistency_errors() == []


@pytest.mark.asyncio
async def test_merging_twice_is_idempotent():
    batch = delta(entity("a", "d1", "x"), entity("b", "d1", "y"), relation("a", "b", "d1", "z"))
    once = await merge_incremental(GraphStore(), batch)

    twice = await merge_incremental(once, batch)

    assert twice.graph == once.graph
    assert twice.chunks == once.chunks


@pytest.mark.asyncio
async def test_merge_is_associative_on_fragments():
    a = delta(entity("a", "d1", "a1"), entity("b", "d1", "b1"), relation("a", "b", "d1", "r1"))
    b = delta(entity("b", "d2", "b2"), entity("c", "d2", "c1"), relation("b", "c", "d2", "r2"))
    c = delta(entity("a", "d3", "a3"), entity("c", "d3", "c3"), relation("a", "c", "d3", "r3"))

    left = await merge_incremental(await merge_incremental(GraphStore(), a), b)
    left = await merge_incremental(left, c)

    right_tail = await merge_incremental(await merge_incremental(GraphStore(), b), c)
    right = await merge_incremental(GraphStore(), a)
    right = await merge_incremental(
        right, GraphDelta(graph=right_tail.graph, chunks=list(right_tail.chunks.values()))
    )

    assert fragment_multiset(left) == fragment_multiset(right)
    assert set(left.graph.relations) == set(right.graph.relations)


@pytest.mark.asyncio
async def test_sizes_never_shrink():
    store = GraphStore()
    sizes = []
    for batch in [
        delta(entity("a", "d1"), entity("b", "d1"), relation("a", "b", "d1")),
        delta(entity("a", "d2", "more")),
        delta(entity("c", "d3"), entity("b", "d3"), relation("b", "c", "d3")),
        delta(),
    ]:
        store = await merge_incremental(store, batch)
        sizes.append((len(store.graph.entities), len(store.graph.relations)))

    assert sizes == sorted(sizes)
    assert sizes[-1] == (3, 2)


@pytest.mark.asyncio
async def test_only_changed_items_are_profiled_again():
    profiler = RecordingProfiler()
    store = await merge_incremental(
        GraphStore(),
        delta(entity("a", "d1", "x"), entity("b", "d1", "y"), relation("a", "b", "d1", "z")),
        profiler,
    )
    assert len(profiler.calls[0]) == 3

    store = await merge_incremental(store, delta(entity("a", "d2", "new fact")), profiler)

    assert [item.id for item in profiler.calls[1]] == ["a"]
    assert store.stale_items() == []


@pytest.mark.asyncio
async def test_unchanged_delta_triggers_no_profiling():
    profiler = RecordingProfiler()
    batch = delta(entity("a", "d1", "x"))
    store = await merge_incremental(GraphStore(), batch, profiler)

    await merge_incremental(store, batch, profiler)

    assert len(profiler.calls) == 1


@pytest.mark.asyncio
async def test_relations_take_global_keys_from_profiles():
    store = await merge_incremental(
        GraphStore(),
        delta(entity("a", "d1"), entity("b", "d1"), relation("a", "b", "d1", "z")),
        RecordingProfiler(),
    )

    assert store.graph.relations[RelationId.of("a", "b")].global_keys == ("theme",)
    assert len(store.kv) == 3


@pytest.mark.asyncio
async def test_previous_version_is_left_untouched():
    first = await merge_incremental(GraphStore(), delta(entity("a", "d1", "x")))

    await merge_incremental(first, delta(entity("a", "d2", "y"), entity("b", "d2")))

    assert list(first.graph.entities) == ["a"]
    assert first.graph.entities["a"].description_fragments == ("x",)
    assert first.version == 1


def test_missing_chunks_are_reported():
    graph = KnowledgeGraph([entity("a", "d1")])

    errors = GraphStore(graph=graph).consistency_errors()

    assert errors == ["a cites unknown chunks ['d1#0']"]
