import os
from enum import StrEnum
from pathlib import Path

from pydantic import BaseModel, Field, ValidationError, model_validator
from pydantic_settings import (
    BaseSettings,
    PydanticBaseSettingsSource,
    SettingsConfigDict,
    TomlConfigSettingsSource,
)

from app.core.errors import RagError, RagErrorKind
from app.model.constants import DEFAULT_ENTITY_TYPES
from app.model.ledger import DEFAULT_C_MAX


class TokenCounterKind(StrEnum):
    WHITESPACE = "whitespace"
    TIKTOKEN = "tiktoken"


class ProviderKind(StrEnum):
    MOCK = "mock"
    OPENAI = "openai"


class EmbedderKind(StrEnum):
    HASHING = "hashing"
    OPENAI = "openai"


class JudgePolicy(StrEnum):
    """Verdict strategy of the deterministic mock judge."""

    POSITION_A = "position_a"
    POSITION_B = "position_b"
    LONGER = "longer"


class RetrievalMode(StrEnum):
    HYBRID = "hybrid"
    LOCAL = "local"
    GLOBAL = "global"
    NAIVE = "naive"


class ChunkingConfig(BaseModel):
    chunk_size: int = Field(default=1200, ge=1)
    overlap: int = Field(default=100, ge=0)
    token_counter: TokenCounterKind = TokenCounterKind.WHITESPACE
    tiktoken_encoding: str = "cl100k_base"

    @model_validator(mode="after")
    def check_overlap(self) -> "ChunkingConfig":
        if self.overlap >= self.chunk_size:
            raise ValueError("overlap must be smaller than chunk_size")
        return self


class ExtractionSettings(BaseModel):
    gleaning: int = Field(default=1, ge=0)
    entity_types: list[str] = Field(default_factory=lambda: list(DEFAULT_ENTITY_TYPES))
    summary_max_tokens: int = Field(default=2000, ge=1)
    resummarize: bool = False


class ProviderSettings(BaseModel):
    kind: ProviderKind = ProviderKind.MOCK
    base_url: str = "https://api.openai.com/v1"
    model: str = "gpt-4o-mini"
    # Name of the environment variable holding the key; the key itself is
    # never part of the configuration.
    api_key_env: str = "RAG_PROVIDER_API_KEY"
    max_in_flight: int = Field(default=8, ge=1)
    max_tokens: int = Field(default=4096, ge=1)
    c_max: int = Field(default=DEFAULT_C_MAX, ge=1)
    timeout: float = Field(default=120.0, gt=0)

    # Deterministic mock knobs
    per_pass_limit: int = Field(default=6, ge=1)
    judge_policy: JudgePolicy = JudgePolicy.LONGER


class EmbedderSettings(BaseModel):
    kind: EmbedderKind = EmbedderKind.HASHING
    dimension: int = Field(default=128, ge=1)
    base_url: str = "https://api.openai.com/v1"
    model: str = "text-embedding-3-small"
    api_key_env: str = "RAG_PROVIDER_API_KEY"
    cache_path: Path | None = None
    cache_size: int = Field(default=100_000, ge=1)


class RetrievalSettings(BaseModel):
    top_k: int = Field(default=20, ge=1)
    budget_tokens: int = Field(default=8000, ge=1)
    mode: RetrievalMode = RetrievalMode.HYBRID
    include_origin_text: bool = True
    keyword_prompt_token_bound: int = Field(default=200, ge=1)


class StorageSettings(BaseModel):
    path: Path = Path("rag_store.ndjson")

    @property
    def ledger_path(self) -> Path:
        return self.path.with_name(self.path.name + ".ledger.json")


class EvaluationSettings(BaseModel):
    # Parameters of the community-rebuild reference formula shown next to the
    # measured incremental cost.
    reference_communities: int = Field(default=1399, ge=0)
    reference_tokens_per_report: int = Field(default=5000, ge=0)


class Settings(BaseSettings):
    # General
    ENVIRONMENT: str = "development"
    LOG_LEVEL: str = "INFO"

    # Monitoring
    SENTRY_DSN: str | None = None

    chunking: ChunkingConfig = Field(default_factory=ChunkingConfig)
    extraction: ExtractionSettings = Field(default_factory=ExtractionSettings)
    provider: ProviderSettings = Field(default_factory=ProviderSettings)
    # Falls back to ``provider`` when unset so a cheap model can answer and a
    # strong one judge.
    judge_provider: ProviderSettings | None = None
    embedder: EmbedderSettings = Field(default_factory=EmbedderSettings)
    retrieval: RetrievalSettings = Field(default_factory=RetrievalSettings)
    storage: StorageSettings = Field(default_factory=StorageSettings)
    evaluation: EvaluationSettings = Field(default_factory=EvaluationSettings)

    model_config = SettingsConfigDict(
        env_file=os.getenv("ENV_FILE", ".env"),
        env_nested_delimiter="__",
        extra="ignore",
    )

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> tuple[PydanticBaseSettingsSource, ...]:
        return (
            init_settings,
            env_settings,
            dotenv_settings,
            TomlConfigSettingsSource(settings_cls),
        )

    @property
    def effective_judge_provider(self) -> ProviderSettings:
        return self.judge_provider or self.provider


def _describe_validation_error(exc: ValidationError) -> str:
    problems = []
    for error in exc.errors():
        field = ".".join(str(part) for part in error["loc"]) or "<root>"
        problems.append(f"{field}: {error['msg']}")
    return "Invalid configuration: " + "; ".join(problems)


def load_settings(config_path: Path | None = None, **overrides) -> Settings:
    """Load and validate settings, optionally layering a TOML config file.

    The file is looked up from ``config_path`` first, then the ``RAG_CONFIG``
    environment variable.

    Raises:
        RagError: INVALID_CONFIG naming the offending field(s)
    """
    if config_path is None and os.getenv("RAG_CONFIG"):
        config_path = Path(os.environ["RAG_CONFIG"])

    try:
        if config_path is None:
            return Settings(**overrides)
        if not config_path.is_file():
            raise RagError(
                message=f"Config file not found: {config_path}",
                kind=RagErrorKind.INVALID_CONFIG,
            )

        class FileSettings(Settings):
            model_config = SettingsConfigDict(toml_file=config_path)

        return FileSettings(**overrides)
    except ValidationError as exc:
        raise RagError(
            message=_describe_validation_error(exc),
            kind=RagErrorKind.INVALID_CONFIG,
        ) from exc
