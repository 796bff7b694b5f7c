import json
import os
from unittest.mock import patch

import httpx
import pytest
import respx

from app.config import ProviderSettings
from app.core.errors import RagError, RagErrorKind
from app.core.http import RetryPolicy
from app.llm.constants import PromptTask
from app.model.ledger import CostLedger, Phase

from .client import OpenAICompatProvider
from .mocks import (
    MOCK_CHAT_COMPLETION_NO_USAGE,
    MOCK_CHAT_COMPLETION_RESPONSE,
    MOCK_ERROR_400,
    MOCK_ERROR_429,
)

BASE_URL = "https://llm.example.test/v1"


@pytest.fixture
def settings():
    return ProviderSettings(kind="openai", base_url=BASE_URL, model="gpt-4o-mini")


@pytest.fixture
def ledger():
    return CostLedger()


@pytest.fixture
def provider(settings, ledger):
    with patch.dict(os.environ, {"RAG_PROVIDER_API_KEY": "sk-test-key-123456"}):
        yield OpenAICompatProvider(settings, ledger, retry_policy=RetryPolicy(max_retries=0))


def test_missing_api_key_is_a_config_error(settings, ledger):
    with patch.dict(os.environ, {}, clear=True):
        with pytest.raises(RagError) as exc_info:
            OpenAICompatProvider(settings, ledger)

    assert exc_info.value.kind == RagErrorKind.INVALID_CONFIG
    assert "RAG_PROVIDER_API_KEY" in exc_info.value.message


@respx.mock
@pytest.mark.asyncio
async def test_complete_posts_chat_request_and_reads_usage(provider, ledger):
    route = respx.post(f"{BASE_URL}/chat/completions").mock(
        return_value=httpx.Response(200, json=MOCK_CHAT_COMPLETION_RESPONSE)
    )

    text = await provider.complete(
        "---Task: keyword_extraction---\nquery",
        phase=Phase.RETRIEVE,
        task=PromptTask.KEYWORD_EXTRACTION,
    )

    assert json.loads(text)["low_level_keywords"] == ["artificial intelligence"]
    request = route.calls.last.request
    assert request.headers["authorization"] == "Bearer sk-test-key-123456"
    body = json.loads(request.content)
    assert body["model"] == "gpt-4o-mini"
    assert body["messages"] == [
        {"role": "user", "content": "---Task: keyword_extraction---\nquery"}
    ]
    assert body["max_tokens"] == 4096
    assert ledger[Phase.RETRIEVE].api_calls == 1
    assert ledger[Phase.RETRIEVE].tokens_in == 57
    assert ledger[Phase.RETRIEVE].tokens_out == 19


@respx.mock
@pytest.mark.asyncio
async def test_missing_usage_falls_back_to_counter(provider, ledger):
    respx.post(f"{BASE_URL}/chat/completions").mock(
        return_value=httpx.Response(200, json=MOCK_CHAT_COMPLETION_NO_USAGE)
    )

    await provider.complete("one two", phase=Phase.GENERATE, task=PromptTask.GRAPH_ANSWER)

    assert ledger[Phase.GENERATE].tokens_in == 2
    assert ledger[Phase.GENERATE].tokens_out == 3


@respx.mock
@pytest.mark.asyncio
async def test_rate_limit_is_retryable(provider, ledger):
    respx.post(f"{BASE_URL}/chat/completions").mock(
        return_value=httpx.Response(429, json=MOCK_ERROR_429)
    )

    with pytest.raises(RagError) as exc_info:
        await provider.complete("p", phase=Phase.INDEX, task=PromptTask.ENTITY_EXTRACTION)

    assert exc_info.value.kind == RagErrorKind.PROVIDER
    assert exc_info.value.retryable is True
    assert exc_info.value.message == "Rate limit reached for requests"
    assert ledger[Phase.INDEX].api_calls == 1


@respx.mock
@pytest.mark.asyncio
async def test_bad_request_is_not_retryable(provider):
    respx.post(f"{BASE_URL}/chat/completions").mock(
        return_value=httpx.Response(400, json=MOCK_ERROR_400)
    )

    with pytest.raises(RagError) as exc_info:
        await provider.complete("p", phase=Phase.INDEX, task=PromptTask.ENTITY_EXTRACTION)

    assert exc_info.value.retryable is False
    assert exc_info.value.details["status_code"] == 400


@respx.mock
@pytest.mark.asyncio
async def test_server_error_without_json_body(provider):
    respx.post(f"{BASE_URL}/chat/completions").mock(return_value=httpx.Response(502))

    with pytest.raises(RagError) as exc_info:
        await provider.complete("p", phase=Phase.INDEX, task=PromptTask.ENTITY_EXTRACTION)

    assert exc_info.value.message == "Provider error (status 502)"
    assert exc_info.value.retryable is True


@respx.mock
@pytest.mark.asyncio
@pytest.mark.parametrize(
    "body",
    [b"<html>gateway</html>", b'{"id": "x", "choices": "not a list"}'],
    ids=["not-json", "wrong-schema"],
)
async def test_unreadable_success_body_is_an_accounted_provider_error(
    provider, ledger, body
):
    respx.post(f"{BASE_URL}/chat/completions").mock(
        return_value=httpx.Response(200, content=body)
    )

    with pytest.raises(RagError) as exc_info:
        await provider.complete(
            "one two three", phase=Phase.GENERATE, task=PromptTask.GRAPH_ANSWER
        )

    assert exc_info.value.kind == RagErrorKind.PROVIDER
    assert exc_info.value.retryable is False
    assert exc_info.value.details["status_code"] == 200
    assert ledger[Phase.GENERATE].api_calls == 1
    assert ledger[Phase.GENERATE].tokens_in == 3
