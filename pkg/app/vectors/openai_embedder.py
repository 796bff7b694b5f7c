import httpx
import numpy as np

from app.config import EmbedderSettings
from app.core.errors import RagError, RagErrorKind
from app.core.http import RetryPolicy, create_http_client
from app.ingest.tokens import TokenCounter
from app.llm.openai_compat.models import EmbeddingRequest, EmbeddingResponse
from app.llm.openai_compat.utils import decode_body, error_from_response, read_api_key
from app.model.ledger import CostLedger

from .cache import EmbeddingCache
from .embedders import Embedder


class OpenAICompatEmbedder(Embedder):
    """Client for OpenAI-compatible ``/embeddings`` endpoints."""

    def __init__(
        self,
        settings: EmbedderSettings,
        ledger: CostLedger,
        cache: EmbeddingCache | None = None,
        counter: TokenCounter | None = None,
        retry_policy: RetryPolicy | None = None,
    ):
        super().__init__(ledger, settings.dimension, cache, counter)
        self.settings = settings
        self.base_url = settings.base_url.rstrip("/")
        self.retry_policy = retry_policy
        self._api_key = read_api_key(settings.api_key_env)

    @property
    def embedder_id(self) -> str:
        return f"openai:{self.settings.model}:{self.dimension}"

    async def _post(self, texts: list[str]) -> httpx.Response:
        request = EmbeddingRequest(model=self.settings.model, input=texts)
        try:
            async with create_http_client(
                base_url=self.base_url,
                headers={"Authorization": f"Bearer {self._api_key}"},
                policy=self.retry_policy,
            ) as client:
                return await client.post("/embeddings", json=request.model_dump())
        except httpx.HTTPError as exc:
            raise RagError(
                message=f"{self.embedder_id} request failed: {exc}",
                kind=RagErrorKind.EMBEDDING,
                retryable=isinstance(exc, httpx.TransportError),
            ) from exc

    async def _embed_batch(self, texts: list[str]) -> tuple[np.ndarray, int]:
        response = await self._post(texts)
        if not 200 <= response.status_code < 300:
            raise error_from_response(response, RagErrorKind.EMBEDDING)

        data = decode_body(response, EmbeddingResponse, RagErrorKind.EMBEDDING)
        if len(data.data) != len(texts):
            raise RagError(
                message=(
                    f"{self.embedder_id} returned {len(data.data)} vectors "
                    f"for {len(texts)} texts"
                ),
                kind=RagErrorKind.EMBEDDING,
            )
        ordered = sorted(data.data, key=lambda item: item.index)
        vectors = np.asarray([item.embedding for item in ordered], dtype=np.float64)
        if data.usage is not None:
            tokens = data.usage.prompt_tokens
        else:
            tokens = sum(self.counter.count(text) for text in texts)
        return vectors, tokens
