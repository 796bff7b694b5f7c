import asyncio
import logging
import time
from abc import ABC, abstractmethod

import httpx
from pydantic import BaseModel, Field

from app.core import metrics
from app.core.errors import RagError, RagErrorKind
from app.core.http import RETRYABLE_STATUS_CODES
from app.ingest.tokens import TokenCounter, get_counter
from app.model.ledger import CostLedger, Phase

from .constants import PromptTask

logger = logging.getLogger(__name__)


class Completion(BaseModel):
    text: str
    tokens_in: int = Field(ge=0)
    tokens_out: int = Field(ge=0)


class LlmProvider(ABC):
    """Abstract base class for language-model providers.

    ``complete`` is the only entry point callers use. It enforces the
    per-call token ceiling, bounds in-flight calls and records exactly one
    ledger call per round trip, then delegates to ``_complete``.
    """

    def __init__(
        self,
        ledger: CostLedger,
        counter: TokenCounter | None = None,
        max_in_flight: int = 8,
    ):
        self.ledger = ledger
        self.counter = counter or get_counter()
        self._semaphore = asyncio.Semaphore(max_in_flight)

    @property
    @abstractmethod
    def provider_id(self) -> str:
        """Stable identifier used in logs and metrics.

        Returns:
            Provider name, e.g. ``"mock"`` or ``"openai:gpt-4o-mini"``
        """

    @abstractmethod
    async def _complete(self, prompt: str, max_tokens: int | None) -> Completion:
        """Perform one round trip to the model.

        Args:
            prompt: Full prompt text, starting with its task header
            max_tokens: Optional ceiling on generated tokens

        Returns:
            Completion with the raw text and token usage

        Raises:
            RagError: PROVIDER for failures reported by the backend
            httpx.HTTPError: If the transport fails
        """

    async def complete(
        self,
        prompt: str,
        *,
        phase: Phase,
        task: PromptTask,
        max_tokens: int | None = None,
    ) -> str:
        """Run one provider call and account for it.

        Args:
            prompt: Prompt text
            phase: Ledger phase the call is charged to
            task: Prompt task, used for metrics labels
            max_tokens: Optional ceiling on generated tokens

        Returns:
            The provider's text, verbatim

        Raises:
            RagError: PROMPT_TOO_LARGE before any call when the prompt exceeds
                c_max; PROVIDER when the round trip fails
        """
        prompt_tokens = self.counter.count(prompt)
        if prompt_tokens > self.ledger.c_max:
            raise RagError(
                message=f"Prompt of {prompt_tokens} tokens exceeds c_max={self.ledger.c_max}",
                kind=RagErrorKind.PROMPT_TOO_LARGE,
                details={"task": task.value, "tokens": prompt_tokens},
            )

        async with self._semaphore:
            started = time.perf_counter()
            try:
                completion = await self._complete(prompt, max_tokens)
            except RagError:
                self._account_failure(phase, task, prompt_tokens, started)
                raise
            except httpx.HTTPStatusError as exc:
                self._account_failure(phase, task, prompt_tokens, started)
                status = exc.response.status_code
                raise RagError(
                    message=f"{self.provider_id} returned HTTP {status}",
                    kind=RagErrorKind.PROVIDER,
                    retryable=status in RETRYABLE_STATUS_CODES,
                    details={"status_code": status, "task": task.value},
                ) from exc
            except httpx.HTTPError as exc:
                self._account_failure(phase, task, prompt_tokens, started)
                raise RagError(
                    message=f"{self.provider_id} request failed: {exc}",
                    kind=RagErrorKind.PROVIDER,
                    retryable=True,
                    details={"task": task.value},
                ) from exc

        self.ledger.record_call(phase, completion.tokens_in, completion.tokens_out)
        metrics.record_provider_call(
            phase=phase.value,
            task=task.value,
            duration=time.perf_counter() - started,
            success=True,
            tokens_in=completion.tokens_in,
            tokens_out=completion.tokens_out,
        )
        return completion.text

    def _account_failure(
        self, phase: Phase, task: PromptTask, prompt_tokens: int, started: float
    ) -> None:
        # a failed round trip is still a call
        self.ledger.record_call(phase, prompt_tokens, 0)
        metrics.record_provider_call(
            phase=phase.value,
            task=task.value,
            duration=time.perf_counter() - started,
            success=False,
            tokens_in=prompt_tokens,
        )
        logger.warning("Provider %s failed on %s (%s)", self.provider_id, task.value, phase.value)
