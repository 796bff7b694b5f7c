from pydantic import BaseModel, ConfigDict, Field


class _OpenAIBaseModel(BaseModel):
    model_config = ConfigDict(extra="ignore")


class ChatMessage(_OpenAIBaseModel):
    role: str
    content: str | None = None


class ChatCompletionRequest(_OpenAIBaseModel):
    model: str
    messages: list[ChatMessage]
    max_tokens: int | None = None
    temperature: float = 0.0


class ChatChoice(_OpenAIBaseModel):
    index: int = 0
    message: ChatMessage
    finish_reason: str | None = None


class Usage(_OpenAIBaseModel):
    prompt_tokens: int = Field(default=0, ge=0)
    completion_tokens: int = Field(default=0, ge=0)
    total_tokens: int = Field(default=0, ge=0)


class ChatCompletionResponse(_OpenAIBaseModel):
    """Response from /chat/completions."""

    id: str | None = None
    model: str | None = None
    choices: list[ChatChoice] = Field(default_factory=list)
    usage: Usage | None = None


class EmbeddingRequest(_OpenAIBaseModel):
    model: str
    input: list[str]


class EmbeddingData(_OpenAIBaseModel):
    index: int
    embedding: list[float]


class EmbeddingResponse(_OpenAIBaseModel):
    """Response from /embeddings."""

    data: list[EmbeddingData] = Field(default_factory=list)
    model: str | None = None
    usage: Usage | None = None


class OpenAIErrorBody(_OpenAIBaseModel):
    message: str = ""
    type: str | None = None
    code: str | int | None = None


class OpenAIError(_OpenAIBaseModel):
    error: OpenAIErrorBody
