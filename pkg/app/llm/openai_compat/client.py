import httpx

from app.config import ProviderSettings
from app.core.errors import RagErrorKind
from app.core.http import RetryPolicy, create_http_client
from app.ingest.tokens import TokenCounter
from app.llm.base import Completion, LlmProvider
from app.model.ledger import CostLedger

from .models import ChatCompletionRequest, ChatCompletionResponse, ChatMessage
from .utils import decode_body, error_from_response, read_api_key


class OpenAICompatProvider(LlmProvider):
    """Chat-completions client for OpenAI-compatible endpoints."""

    def __init__(
        self,
        settings: ProviderSettings,
        ledger: CostLedger,
        counter: TokenCounter | None = None,
        retry_policy: RetryPolicy | None = None,
    ):
        super().__init__(ledger, counter, settings.max_in_flight)
        self.settings = settings
        self.base_url = settings.base_url.rstrip("/")
        self.retry_policy = retry_policy
        self._api_key = read_api_key(settings.api_key_env)

    @property
    def provider_id(self) -> str:
        return f"openai:{self.settings.model}"

    def _create_client(self) -> httpx.AsyncClient:
        return create_http_client(
            base_url=self.base_url,
            headers={"Authorization": f"Bearer {self._api_key}"},
            timeout=self.settings.timeout,
            policy=self.retry_policy,
        )

    async def _complete(self, prompt: str, max_tokens: int | None) -> Completion:
        request = ChatCompletionRequest(
            model=self.settings.model,
            messages=[ChatMessage(role="user", content=prompt)],
            max_tokens=max_tokens or self.settings.max_tokens,
        )

        async with self._create_client() as client:
            response = await client.post(
                "/chat/completions", json=request.model_dump(exclude_none=True)
            )

        if not 200 <= response.status_code < 300:
            raise error_from_response(response, RagErrorKind.PROVIDER)

        data = decode_body(response, ChatCompletionResponse, RagErrorKind.PROVIDER)
        text = (data.choices[0].message.content or "") if data.choices else ""
        if data.usage is not None:
            tokens_in, tokens_out = data.usage.prompt_tokens, data.usage.completion_tokens
        else:
            tokens_in, tokens_out = self.counter.count(prompt), self.counter.count(text)
        return Completion(text=text, tokens_in=tokens_in, tokens_out=tokens_out)
