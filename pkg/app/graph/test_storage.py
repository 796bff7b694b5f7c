import json
from pathlib import Path

import pytest

from app.core.errors import RagError, RagErrorKind
from app.model.ledger import CostLedger, Phase, PhaseCost
from app.model.models import (
    Chunk,
    ChunkId,
    Entity,
    KnowledgeGraph,
    KvRecord,
    Relation,
    RelationId,
)

from .storage import dumps, load, load_ledger, loads, save, save_ledger
from .store import GraphStore

CHUNK = Chunk.create(doc="notes/a.txt", index=0, text="Alice met Bob.", token_count=3)


def populated_store() -> GraphStore:
    alice = Entity(
        id="alice",
        name="Alice",
        entity_type="person",
        description_fragments=("Alice met Bob.", "Ünïcode note"),
        source_chunks={CHUNK.id},
    )
    bob = Entity(id="bob", name="Bob", entity_type="person", source_chunks={CHUNK.id})
    met = Relation(
        id=RelationId.of("alice", "bob"),
        source="bob",
        target="alice",
        description_fragments=("Alice met Bob.",),
        strength=0.7,
        keywords=("meeting",),
        global_keys=("meeting",),
        source_chunks={CHUNK.id},
    )
    kv = [
        KvRecord(keys=("Alice",), value="Alice is a person.", subject="alice", fingerprint="f1"),
        KvRecord(keys=("meeting",), value="They met.", subject=met.id, fingerprint="f2"),
    ]
    return GraphStore(
        graph=KnowledgeGraph([alice, bob], [met]),
        kv={record.key: record for record in kv},
        chunks={CHUNK.id: CHUNK},
        version=4,
    )


def test_empty_store_round_trips(tmp_path: Path):
    path = tmp_path / "store.ndjson"

    save(GraphStore(), path)

    assert load(path) == GraphStore()


def test_populated_store_round_trips_field_for_field(tmp_path: Path):
    store = populated_store()
    path = tmp_path / "nested" / "store.ndjson"

    save(store, path)
    loaded = load(path)

    assert loaded == store
    assert loaded.graph.relations[RelationId.of("alice", "bob")].source == "bob"
    assert loaded.chunks[ChunkId(doc="notes/a.txt", index=0)] == CHUNK
    assert dumps(loaded) == path.read_text(encoding="utf-8")


def test_unicode_line_separators_survive_a_round_trip(tmp_path: Path):
    chunk = Chunk.create(
        doc="notes/b.txt", index=0, text="First\x85second\u2029third", token_count=1
    )
    carol = Entity(
        id="carol",
        name="Carol",
        entity_type="person",
        description_fragments=("Leads the lab.\u2028Writes papers.",),
        source_chunks={chunk.id},
    )
    record = KvRecord(
        keys=("Carol",), value="Carol\u2029leads.", subject="carol", fingerprint="f3"
    )
    store = GraphStore(
        graph=KnowledgeGraph([carol], []),
        kv={record.key: record},
        chunks={chunk.id: chunk},
        version=1,
    )
    path = tmp_path / "store.ndjson"

    save(store, path)

    assert len(path.read_text(encoding="utf-8").split("\n")) == 1 + 3 + 1
    assert load(path) == store


def test_serialization_is_canonical():
    store = populated_store()
    reordered = GraphStore(
        graph=KnowledgeGraph(
            reversed(list(store.graph.entities.values())), store.graph.relations.values()
        ),
        kv=dict(reversed(list(store.kv.items()))),
        chunks=store.chunks,
        version=store.version,
    )

    assert dumps(reordered) == dumps(store)


def test_header_describes_the_body():
    header = json.loads(dumps(populated_store()).splitlines()[0])

    assert header["format"] == "lattice-rag-store"
    assert header["format_version"] == 1
    assert header["version"] == 4
    assert header["counts"] == {"entity": 2, "relation": 1, "kv": 2, "chunk": 1}


def test_save_leaves_no_temporary_files(tmp_path: Path):
    save(populated_store(), tmp_path / "store.ndjson")

    assert [p.name for p in tmp_path.iterdir()] == ["store.ndjson"]


@pytest.mark.parametrize("keep", [0, 10, 200, -5])
def test_truncated_file_fails_the_checksum(tmp_path: Path, keep: int):
    path = tmp_path / "store.ndjson"
    save(populated_store(), path)
    text = path.read_text(encoding="utf-8")
    path.write_text(text[:keep], encoding="utf-8")

    with pytest.raises(RagError) as exc_info:
        load(path)

    assert exc_info.value.kind == RagErrorKind.CHECKSUM


def test_altered_body_fails_the_checksum():
    text = dumps(populated_store()).replace("Alice met Bob.", "Alice met Eve.", 1)

    with pytest.raises(RagError) as exc_info:
        loads(text)

    assert exc_info.value.kind == RagErrorKind.CHECKSUM


def test_other_format_version_needs_migration():
    header, body = dumps(populated_store()).split("\n", 1)
    data = json.loads(header)
    data["format_version"] = 99

    with pytest.raises(RagError) as exc_info:
        loads(json.dumps(data) + "\n" + body)

    assert exc_info.value.kind == RagErrorKind.VERSION_MISMATCH
    assert exc_info.value.details["found"] == 99


def test_foreign_file_is_a_storage_error():
    with pytest.raises(RagError) as exc_info:
        loads('{"format": "something-else"}\n')

    assert exc_info.value.kind == RagErrorKind.STORAGE


def test_missing_store(tmp_path: Path):
    with pytest.raises(RagError) as exc_info:
        load(tmp_path / "absent.ndjson")

    assert exc_info.value.kind == RagErrorKind.MISSING_STORE
    assert exc_info.value.exit_code == 5


def test_ledger_round_trips_and_defaults_to_fresh(tmp_path: Path):
    path = tmp_path / "store.ndjson.ledger.json"
    assert load_ledger(path).total_api_calls == 0

    ledger = CostLedger()
    ledger.record_call(Phase.INDEX, 10, 4)
    ledger.record_embedding(Phase.RETRIEVE, 3)
    save_ledger(ledger, path)
    loaded = load_ledger(path, c_max=1000)

    assert loaded[Phase.INDEX] == PhaseCost(tokens_in=10, tokens_out=4, api_calls=1)
    assert loaded[Phase.RETRIEVE].embed_tokens == 3
    assert loaded.c_max == 1000


def test_unreadable_ledger_is_a_storage_error(tmp_path: Path):
    path = tmp_path / "ledger.json"
    path.write_text("{not json", encoding="utf-8")

    with pytest.raises(RagError) as exc_info:
        load_ledger(path)

    assert exc_info.value.kind == RagErrorKind.STORAGE
