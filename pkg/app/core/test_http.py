from unittest.mock import AsyncMock, patch

import httpx
import pytest
from prometheus_client import REGISTRY

from app.core.http import RetryPolicy, RetryTransport, create_http_client

COMPLETIONS = "https://llm.example.com/v1/chat/completions"
EMBEDDINGS = "https://embed.example.com/v1/embeddings"

NO_WAIT = {"initial_delay": 0.0, "jitter_factor": 0.0}


class ScriptedTransport(httpx.AsyncBaseTransport):
    """Replays responses or exceptions; the last item repeats forever."""

    def __init__(self, *items: httpx.Response | Exception):
        self.items = list(items)
        self.attempts = 0

    async def handle_async_request(self, request: httpx.Request) -> httpx.Response:
        item = self.items[min(self.attempts, len(self.items) - 1)]
        self.attempts += 1
        if isinstance(item, Exception):
            raise item
        return item


def reply(status_code: int, **headers: str) -> httpx.Response:
    return httpx.Response(status_code=status_code, headers=headers)


async def send(inner: ScriptedTransport, url: str = COMPLETIONS, **policy) -> httpx.Response:
    transport = RetryTransport(transport=inner, policy=RetryPolicy(**policy))
    return await transport.handle_async_request(httpx.Request("POST", url))


def retries_for(host: str) -> float:
    return REGISTRY.get_sample_value("rag_http_retries_total", {"host": host}) or 0.0


@pytest.mark.asyncio
@pytest.mark.parametrize(
    "items,status,attempts",
    [
        ((reply(200),), 200, 1),
        ((reply(400),), 400, 1),
        ((reply(401),), 401, 1),
        ((reply(429), reply(200)), 200, 2),
        ((reply(500), reply(503), reply(200)), 200, 3),
        ((httpx.ReadTimeout("slow"), reply(200)), 200, 2),
        ((httpx.ConnectError("refused"), reply(200)), 200, 2),
        ((reply(503),), 503, 4),
    ],
    ids=["ok", "bad-request", "unauthorized", "rate-limited", "server-errors",
         "read-timeout", "connect-error", "exhausted"],
)
async def test_attempts_per_outcome(items, status: int, attempts: int):
    inner = ScriptedTransport(*items)

    response = await send(inner, max_retries=3, **NO_WAIT)

    assert response.status_code == status
    assert inner.attempts == attempts


@pytest.mark.asyncio
async def test_exhausted_timeouts_reraise():
    inner = ScriptedTransport(httpx.ReadTimeout("slow"))

    with pytest.raises(httpx.ReadTimeout):
        await send(inner, max_retries=2, **NO_WAIT)

    assert inner.attempts == 3


@pytest.mark.asyncio
async def test_unexpected_exception_is_not_retried():
    inner = ScriptedTransport(RuntimeError("bug"))

    with pytest.raises(RuntimeError, match="bug"):
        await send(inner)

    assert inner.attempts == 1


@pytest.mark.asyncio
async def test_waits_grow_geometrically_up_to_the_cap():
    inner = ScriptedTransport(reply(503), reply(503), reply(503), reply(503), reply(200))

    with patch("app.core.http.asyncio.sleep", new_callable=AsyncMock) as sleep:
        await send(inner, max_retries=4, initial_delay=1.0, max_delay=3.0, jitter_factor=0.0)

    assert [call.args[0] for call in sleep.call_args_list] == [1.0, 2.0, 3.0, 3.0]


@pytest.mark.asyncio
@pytest.mark.parametrize("header,expected", [("2", 2.0), ("600", 5.0), ("soon", 0.25)])
async def test_retry_after_is_honoured_and_capped(header: str, expected: float):
    inner = ScriptedTransport(reply(429, **{"retry-after": header}), reply(200))

    with patch("app.core.http.asyncio.sleep", new_callable=AsyncMock) as sleep:
        await send(inner, initial_delay=0.25, max_delay=5.0, jitter_factor=0.0)

    sleep.assert_called_once_with(expected)


@pytest.mark.asyncio
async def test_total_time_budget_stops_retries():
    inner = ScriptedTransport(reply(502))

    response = await send(inner, max_total_time=0.0, **NO_WAIT)

    assert response.status_code == 502
    assert inner.attempts == 1


@pytest.mark.asyncio
async def test_retries_are_counted_per_host():
    before = retries_for("embed.example.com")

    await send(ScriptedTransport(reply(503), reply(503), reply(200)), EMBEDDINGS, **NO_WAIT)

    assert retries_for("embed.example.com") == before + 2


def test_jitter_stays_within_its_factor():
    policy = RetryPolicy(jitter_factor=0.5)

    waits = [policy.with_jitter(2.0) for _ in range(50)]

    assert all(2.0 <= wait <= 3.0 for wait in waits)


@pytest.mark.asyncio
async def test_client_always_retries_below_a_custom_transport():
    inner = ScriptedTransport(reply(502), reply(200))
    client = create_http_client(
        base_url="https://llm.example.com",
        transport=inner,
        policy=RetryPolicy(**NO_WAIT),
    )
    async with client:
        response = await client.post("/v1/chat/completions", json={"model": "m"})

    assert response.status_code == 200
    assert inner.attempts == 2
