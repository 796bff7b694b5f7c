import hashlib
import re
from collections.abc import Iterable
from functools import total_ordering
from typing import Any

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    field_serializer,
    model_serializer,
    model_validator,
)

from app.core.errors import RagError, RagErrorKind

from .constants import DESCRIPTION_SEPARATOR

type DocumentId = str
type EntityId = str

_WHITESPACE = re.compile(r"\s+")


def normalize_entity_name(raw: str) -> EntityId:
    """Trim, collapse internal whitespace and case-fold an entity name.

    Raises:
        RagError: INVALID_NAME if nothing is left after trimming
    """
    name = _WHITESPACE.sub(" ", raw.strip()).casefold()
    if not name:
        raise RagError(
            message=f"Entity name is empty after normalization: {raw!r}",
            kind=RagErrorKind.INVALID_NAME,
        )
    return name


def fragment_hash(fragment: str) -> str:
    return hashlib.sha256(fragment.encode("utf-8")).hexdigest()


def merge_fragments(existing: Iterable[str], incoming: Iterable[str]) -> tuple[str, ...]:
    """Append incoming description fragments not already present.

    Fragments are compared by content hash, which makes repeated merges of
    the same delta a no-op.
    """
    merged = list(existing)
    seen = {fragment_hash(f) for f in merged}
    for fragment in incoming:
        fragment = fragment.strip()
        if not fragment:
            continue
        digest = fragment_hash(fragment)
        if digest not in seen:
            seen.add(digest)
            merged.append(fragment)
    return tuple(merged)


def merge_keywords(existing: Iterable[str], incoming: Iterable[str]) -> tuple[str, ...]:
    """Union keyword lists, first-seen order, case-insensitive dedup."""
    merged: list[str] = []
    seen: set[str] = set()
    for keyword in (*existing, *incoming):
        keyword = _WHITESPACE.sub(" ", keyword.strip())
        folded = keyword.casefold()
        if keyword and folded not in seen:
            seen.add(folded)
            merged.append(keyword)
    return tuple(merged)


class FrozenModel(BaseModel):
    model_config = ConfigDict(frozen=True)


# ============================================================================
# Identifiers
# ============================================================================


@total_ordering
class ChunkId(FrozenModel):
    """(document, ordinal) pair; serialized as ``"<doc>#<ordinal>"``."""

    doc: DocumentId
    index: int = Field(ge=0)

    @model_validator(mode="before")
    @classmethod
    def parse_string_form(cls, data: Any) -> Any:
        if isinstance(data, str):
            doc, sep, index = data.rpartition("#")
            if not sep or not index.isdigit():
                raise ValueError(f"Malformed chunk id: {data!r}")
            return {"doc": doc, "index": int(index)}
        return data

    @model_serializer(mode="plain")
    def serialize(self) -> str:
        return str(self)

    def __str__(self) -> str:
        return f"{self.doc}#{self.index}"

    def __lt__(self, other: "ChunkId") -> bool:
        return (self.doc, self.index) < (other.doc, other.index)


@total_ordering
class RelationId(FrozenModel):
    """Unordered endpoint pair, stored with ``low <= high``."""

    low: EntityId
    high: EntityId

    @classmethod
    def of(cls, a: EntityId, b: EntityId) -> "RelationId":
        low, high = sorted((a, b))
        return cls(low=low, high=high)

    @model_validator(mode="after")
    def check_order(self) -> "RelationId":
        if self.low > self.high:
            raise ValueError("RelationId endpoints must be sorted; use RelationId.of")
        return self

    @property
    def endpoints(self) -> tuple[EntityId, EntityId]:
        return self.low, self.high

    def other(self, entity: EntityId) -> EntityId:
        return self.high if entity == self.low else self.low

    def __str__(self) -> str:
        return f"{self.low} <-> {self.high}"

    def __lt__(self, other: "RelationId") -> bool:
        return (self.low, self.high) < (other.low, other.high)


type Subject = EntityId | RelationId


def subject_key(subject: Subject) -> str:
    """Stable string key for an entity or relation subject."""
    if isinstance(subject, RelationId):
        return f"relation:{subject}"
    return f"entity:{subject}"


# ============================================================================
# Graph elements
# ============================================================================


def _sorted_chunks(chunks: frozenset[ChunkId]) -> list[str]:
    return [str(c) for c in sorted(chunks)]


class Chunk(FrozenModel):
    id: ChunkId
    doc: DocumentId
    text: str
    token_count: int = Field(ge=0)
    content_hash: str

    @classmethod
    def create(cls, doc: DocumentId, index: int, text: str, token_count: int) -> "Chunk":
        return cls(
            id=ChunkId(doc=doc, index=index),
            doc=doc,
            text=text,
            token_count=token_count,
            content_hash=fragment_hash(text),
        )


class Entity(FrozenModel):
    id: EntityId
    name: str
    entity_type: str
    description_fragments: tuple[str, ...] = ()
    source_chunks: frozenset[ChunkId]

    @model_validator(mode="after")
    def check_invariants(self) -> "Entity":
        if not self.source_chunks:
            raise ValueError(f"Entity {self.id!r} has no source chunks")
        if normalize_entity_name(self.name) != self.id:
            raise ValueError(f"Entity name {self.name!r} does not normalize to {self.id!r}")
        return self

    @field_serializer("source_chunks")
    def serialize_chunks(self, chunks: frozenset[ChunkId]) -> list[str]:
        return _sorted_chunks(chunks)

    @property
    def description(self) -> str:
        return DESCRIPTION_SEPARATOR.join(self.description_fragments)

    def content_fingerprint(self) -> str:
        payload = "\x1f".join((self.id, self.entity_type, *self.description_fragments))
        return fragment_hash(payload)


class Relation(FrozenModel):
    """Undirected edge; ``source``/``target`` keep the first-seen direction
    for display only."""

    id: RelationId
    source: EntityId
    target: EntityId
    description_fragments: tuple[str, ...] = ()
    strength: float = Field(default=1.0, ge=0.0, le=1.0)
    keywords: tuple[str, ...] = ()
    global_keys: tuple[str, ...] = ()
    source_chunks: frozenset[ChunkId]

    @model_validator(mode="after")
    def check_invariants(self) -> "Relation":
        if self.source == self.target:
            raise ValueError(f"Relation endpoints must differ: {self.source!r}")
        if RelationId.of(self.source, self.target) != self.id:
            raise ValueError(f"Relation id {self.id} does not match its endpoints")
        if not self.source_chunks:
            raise ValueError(f"Relation {self.id} has no source chunks")
        return self

    @field_serializer("source_chunks")
    def serialize_chunks(self, chunks: frozenset[ChunkId]) -> list[str]:
        return _sorted_chunks(chunks)

    @property
    def description(self) -> str:
        return DESCRIPTION_SEPARATOR.join(self.description_fragments)

    def content_fingerprint(self) -> str:
        # global_keys are profiling output, so they stay out of the fingerprint
        payload = "\x1f".join(
            (
                str(self.id),
                f"{self.strength:.6f}",
                *self.keywords,
                "\x1e",
                *self.description_fragments,
            )
        )
        return fragment_hash(payload)


class KvRecord(FrozenModel):
    """Index key(s) plus summary paragraph for one entity or relation."""

    keys: tuple[str, ...]
    value: str = Field(min_length=1)
    subject: RelationId | EntityId
    fingerprint: str = ""

    @model_validator(mode="after")
    def check_keys(self) -> "KvRecord":
        if not self.keys:
            raise ValueError("KvRecord needs at least one key")
        if isinstance(self.subject, str) and (
            len(self.keys) != 1 or normalize_entity_name(self.keys[0]) != self.subject
        ):
            raise ValueError("Entity KvRecord must have exactly its name as key")
        return self

    @property
    def key(self) -> str:
        return subject_key(self.subject)


class QueryKeywords(FrozenModel):
    low: tuple[str, ...] = ()
    high: tuple[str, ...] = ()

    def is_empty(self) -> bool:
        return not self.low and not self.high


# ============================================================================
# Knowledge graph
# ============================================================================


class KnowledgeGraph:
    """Deduplicated entities and undirected relations with an adjacency map.

    Only the graph package mutates instances; everything else treats a graph
    as a read-only snapshot.
    """

    def __init__(
        self,
        entities: Iterable[Entity] = (),
        relations: Iterable[Relation] = (),
    ):
        self.entities: dict[EntityId, Entity] = {}
        self.relations: dict[RelationId, Relation] = {}
        self.adjacency: dict[EntityId, set[RelationId]] = {}
        for entity in entities:
            self.put_entity(entity)
        for relation in relations:
            self.put_relation(relation)

    def put_entity(self, entity: Entity) -> None:
        self.entities[entity.id] = entity
        self.adjacency.setdefault(entity.id, set())

    def put_relation(self, relation: Relation) -> None:
        for endpoint in relation.id.endpoints:
            if endpoint not in self.entities:
                raise ValueError(f"Relation {relation.id} has dangling endpoint {endpoint!r}")
        self.relations[relation.id] = relation
        for endpoint in relation.id.endpoints:
            self.adjacency[endpoint].add(relation.id)

    def incident(self, entity: EntityId) -> set[RelationId]:
        return self.adjacency.get(entity, set())

    def neighbors(self, entity: EntityId) -> set[EntityId]:
        return {rid.other(entity) for rid in self.incident(entity)}

    def degree(self, entity: EntityId) -> int:
        return len(self.incident(entity))

    def edge_degree(self, relation: RelationId) -> int:
        return self.degree(relation.low) + self.degree(relation.high)

    def copy(self) -> "KnowledgeGraph":
        clone = KnowledgeGraph()
        clone.entities = dict(self.entities)
        clone.relations = dict(self.relations)
        clone.adjacency = {k: set(v) for k, v in self.adjacency.items()}
        return clone

    def consistency_errors(self) -> list[str]:
        """Full scan of the adjacency/relation invariants."""
        errors = []
        for rid, relation in self.relations.items():
            if rid != relation.id:
                errors.append(f"relation keyed {rid} carries id {relation.id}")
            for endpoint in rid.endpoints:
                if endpoint not in self.entities:
                    errors.append(f"relation {rid} has dangling endpoint {endpoint!r}")
                elif rid not in self.adjacency.get(endpoint, set()):
                    errors.append(f"adjacency of {endpoint!r} misses {rid}")
        for entity, rids in self.adjacency.items():
            if entity not in self.entities:
                errors.append(f"adjacency lists unknown entity {entity!r}")
            for rid in rids:
                if rid not in self.relations or entity not in rid.endpoints:
                    errors.append(f"adjacency of {entity!r} lists foreign {rid}")
        for eid, entity in self.entities.items():
            if eid != entity.id:
                errors.append(f"entity keyed {eid!r} carries id {entity.id!r}")
        return errors

    def __len__(self) -> int:
        return len(self.entities)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, KnowledgeGraph):
            return NotImplemented
        return self.entities == other.entities and self.relations == other.relations

    def __repr__(self) -> str:
        return f"KnowledgeGraph(entities={len(self.entities)}, relations={len(self.relations)})"
