from pydantic import BaseModel, Field

from app.model.models import ChunkId


class RawEntity(BaseModel):
    name: str
    entity_type: str
    description: str = ""


class RawRelation(BaseModel):
    source: str
    target: str
    description: str = ""
    keywords: tuple[str, ...] = ()
    strength: float = Field(default=1.0, ge=0.0, le=1.0)


class ExtractionResult(BaseModel):
    """Entities and relations recognized in one chunk, before deduplication.

    Relation endpoints are not checked here; they are resolved against the
    batch and the existing graph at merge time.
    """

    entities: list[RawEntity] = Field(default_factory=list)
    relations: list[RawRelation] = Field(default_factory=list)
    chunk: ChunkId | None = None
    warnings: int = Field(default=0, ge=0)

    def is_empty(self) -> bool:
        return not self.entities and not self.relations
