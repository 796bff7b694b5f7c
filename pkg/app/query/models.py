from pydantic import BaseModel, Field

from app.config import RetrievalMode
from app.model.ledger import Phase, PhaseCost
from app.model.models import Chunk, Entity, KvRecord, QueryKeywords, Relation


class QueryMode(BaseModel):
    mode: RetrievalMode = RetrievalMode.HYBRID
    include_origin_text: bool = True

    @property
    def uses_graph(self) -> bool:
        return self.mode != RetrievalMode.NAIVE

    @property
    def uses_local_leg(self) -> bool:
        return self.mode in (RetrievalMode.HYBRID, RetrievalMode.LOCAL)

    @property
    def uses_global_leg(self) -> bool:
        return self.mode in (RetrievalMode.HYBRID, RetrievalMode.GLOBAL)


class RetrievedEntity(BaseModel):
    entity: Entity
    profile: KvRecord | None = None
    # None for items added by one-hop expansion
    score: float | None = None


class RetrievedRelation(BaseModel):
    relation: Relation
    profile: KvRecord | None = None
    score: float | None = None


class RetrievalContext(BaseModel):
    """Ranked entities, relations and chunks selected for one query."""

    entities: list[RetrievedEntity] = Field(default_factory=list)
    relations: list[RetrievedRelation] = Field(default_factory=list)
    chunks: list[Chunk] = Field(default_factory=list)
    budget_tokens: int = Field(default=8000, ge=1)
    keywords: QueryKeywords = Field(default_factory=QueryKeywords)
    mode: QueryMode = Field(default_factory=QueryMode)
    version: int = 0

    def is_empty(self) -> bool:
        return not self.entities and not self.relations and not self.chunks


class QueryTrace(BaseModel):
    """JSON record of one answered query."""

    query: str
    mode: RetrievalMode
    include_origin_text: bool
    keywords: QueryKeywords | None = None
    entity_ids: list[str] = Field(default_factory=list)
    relation_ids: list[str] = Field(default_factory=list)
    chunk_ids: list[str] = Field(default_factory=list)
    context: str = ""
    answer: str = ""
    store_version: int = 0
    keyword_prompt_tokens: int | None = None
    cost: dict[Phase, PhaseCost] = Field(default_factory=dict)
