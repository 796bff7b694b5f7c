import httpx
import pytest

from app.core.errors import RagError, RagErrorKind
from app.llm.constants import PromptTask
from app.llm.mocks import ScriptedProvider
from app.llm.prompts import prompt_section, prompt_task
from app.llm.rule_based.client import RuleBasedProvider
from app.model.ledger import CostLedger, Phase

from .context import render_context
from .generation import answer
from .models import RetrievalContext
from .test_context import fixture_context


@pytest.mark.asyncio
async def test_mock_answer_echoes_context_sections():
    ledger = CostLedger()

    reply = await answer(
        "Who runs the lab?", render_context(fixture_context()), RuleBasedProvider(ledger)
    )

    assert "ENTITIES" in reply
    assert reply.startswith("Answer to: Who runs the lab?")
    assert ledger[Phase.GENERATE].api_calls == 1
    assert ledger[Phase.RETRIEVE].api_calls == 0


@pytest.mark.asyncio
async def test_empty_context_still_calls_the_provider_once():
    ledger = CostLedger()

    await answer("Anything?", render_context(RetrievalContext()), RuleBasedProvider(ledger))

    assert ledger[Phase.GENERATE].api_calls == 1


@pytest.mark.asyncio
@pytest.mark.parametrize(
    ("naive", "task"), [(False, PromptTask.GRAPH_ANSWER), (True, PromptTask.NAIVE_ANSWER)]
)
async def test_prompt_carries_query_and_context(naive: bool, task: PromptTask):
    provider = ScriptedProvider(CostLedger(), ["  verbatim reply\n"])

    reply = await answer("Why?", "the context", provider, naive=naive)

    assert reply == "  verbatim reply\n"
    assert prompt_task(provider.prompts[0]) == task
    assert prompt_section(provider.prompts[0], "Context") == "the context"
    assert prompt_section(provider.prompts[0], "Question") == "Why?"


@pytest.mark.asyncio
async def test_provider_failure_is_a_retryable_generation_error():
    provider = ScriptedProvider(CostLedger(), [httpx.ReadTimeout("slow")])

    with pytest.raises(RagError) as exc_info:
        await answer("Why?", "", provider)

    assert exc_info.value.kind == RagErrorKind.GENERATION
    assert exc_info.value.retryable is True
    assert exc_info.value.exit_code == 7
