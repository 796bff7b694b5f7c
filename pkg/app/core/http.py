import asyncio
import logging
import random
import time

import httpx
from pydantic import BaseModel, ConfigDict

from . import metrics

logger = logging.getLogger(__name__)

RETRYABLE_STATUS_CODES = frozenset({429, 500, 502, 503, 504})
RETRYABLE_EXCEPTIONS = (httpx.TimeoutException, httpx.ConnectError)


class RetryPolicy(BaseModel):
    """Backoff parameters for provider round trips.

    Delays grow geometrically from ``initial_delay`` up to ``max_delay``; a
    proportional jitter is added on top. No retry is attempted once the
    next wait would overrun ``max_total_time``.
    """

    model_config = ConfigDict(frozen=True)

    max_retries: int = 3
    initial_delay: float = 0.5
    multiplier: float = 2.0
    max_delay: float = 8.0
    jitter_factor: float = 0.5
    max_total_time: float = 60.0

    def next_delay(self, delay: float) -> float:
        return min(delay * self.multiplier, self.max_delay)

    def with_jitter(self, wait: float) -> float:
        return wait + random.uniform(0, self.jitter_factor * wait)

    def retry_after(self, response: httpx.Response, fallback: float) -> float:
        """Honour a numeric ``Retry-After`` header, capped at ``max_delay``."""
        header = response.headers.get("retry-after")
        if response.status_code != 429 or not header:
            return fallback
        try:
            return max(0.0, min(float(header), self.max_delay))
        except ValueError:
            return fallback


class RetryTransport(httpx.AsyncBaseTransport):
    """Retries transient LLM/embedding endpoint failures below the provider.

    A single ``complete()`` stays one logical provider call no matter how
    many attempts the transport makes; attempts are only visible in metrics.
    """

    def __init__(
        self,
        *,
        transport: httpx.AsyncBaseTransport | None = None,
        policy: RetryPolicy | None = None,
    ):
        self._wrapped = transport or httpx.AsyncHTTPTransport()
        self._policy = policy or RetryPolicy()

    def _out_of_time(self, attempt: int, start: float, wait: float = 0.0) -> bool:
        elapsed = time.monotonic() - start
        return (
            attempt >= self._policy.max_retries
            or elapsed >= self._policy.max_total_time
            or wait >= self._policy.max_total_time - elapsed
        )

    async def handle_async_request(self, request: httpx.Request) -> httpx.Response:
        policy = self._policy
        delay = policy.initial_delay
        start = time.monotonic()
        attempt = 0

        while True:
            try:
                response = await self._wrapped.handle_async_request(request)
            except RETRYABLE_EXCEPTIONS as exc:
                wait = policy.with_jitter(delay)
                if self._out_of_time(attempt, start, wait):
                    raise
                reason = type(exc).__name__
            else:
                if response.status_code not in RETRYABLE_STATUS_CODES:
                    return response
                wait = policy.with_jitter(policy.retry_after(response, delay))
                if self._out_of_time(attempt, start, wait):
                    return response
                reason = f"status {response.status_code}"
                await response.aclose()

            attempt += 1
            metrics.record_http_retry(request.url.host)
            logger.warning(
                "Retrying %s (attempt %d/%d, %s, waiting %.2fs)",
                request.url.host,
                attempt,
                policy.max_retries,
                reason,
                wait,
            )
            await asyncio.sleep(wait)
            delay = policy.next_delay(delay)

    async def aclose(self) -> None:
        await self._wrapped.aclose()


def create_http_client(
    *,
    base_url: str = "",
    headers: dict[str, str] | None = None,
    timeout: float = 60.0,
    policy: RetryPolicy | None = None,
    transport: httpx.AsyncBaseTransport | None = None,
) -> httpx.AsyncClient:
    """Build an AsyncClient whose requests go through ``RetryTransport``.

    ``transport`` replaces the innermost network transport only (tests plug
    a mock transport in here); retries always stay on.
    """
    return httpx.AsyncClient(
        base_url=base_url,
        headers=headers,
        timeout=timeout,
        transport=RetryTransport(transport=transport, policy=policy),
    )
