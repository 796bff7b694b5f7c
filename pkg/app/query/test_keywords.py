import httpx
import pytest

from app.core.errors import RagError, RagErrorKind
from app.llm.mocks import ScriptedProvider
from app.llm.prompts import prompt_section
from app.llm.rule_based.client import RuleBasedProvider
from app.model.ledger import CostLedger, Phase

from .keywords import extract_query_keywords, parse_keywords

GOOD = '{"high_level_keywords": ["education", "AI influence"], "low_level_keywords": []}'


def test_parse_keywords_tolerates_chatter_and_missing_field():
    keywords = parse_keywords(f"Sure, here they are:\n```json\n{GOOD}\n```")

    assert keywords.high == ("education", "AI influence")
    assert keywords.low == ()


def test_parse_keywords_drops_case_insensitive_duplicates():
    keywords = parse_keywords('{"low_level_keywords": ["Paris", "paris", " Rome "]}')

    assert keywords.low == ("Paris", "Rome")


@pytest.mark.parametrize(
    "raw",
    [
        "no json here",
        '{"answer": 42}',
        '{"low_level_keywords": "Paris"}',
        '{"high_level_keywords": [1, 2]}',
    ],
)
def test_parse_keywords_rejects_malformed_replies(raw: str):
    with pytest.raises(ValueError):
        parse_keywords(raw)


@pytest.mark.asyncio
async def test_specific_query_is_one_call_with_low_level_keywords():
    ledger = CostLedger()

    keywords = await extract_query_keywords(
        "Who wrote 'Pride and Prejudice'?", RuleBasedProvider(ledger)
    )

    assert "Pride and Prejudice" in keywords.low
    assert ledger[Phase.RETRIEVE].api_calls == 1


@pytest.mark.asyncio
async def test_abstract_query_yields_high_level_keywords():
    keywords = await extract_query_keywords(
        "How does artificial intelligence influence modern education?",
        RuleBasedProvider(CostLedger()),
    )

    assert keywords.high
    assert any("education" in phrase for phrase in keywords.high)


@pytest.mark.asyncio
async def test_mock_keywords_are_deterministic():
    query = "What connects Marie Curie to the Sorbonne and modern physics?"

    first = await extract_query_keywords(query, RuleBasedProvider(CostLedger()))
    second = await extract_query_keywords(query, RuleBasedProvider(CostLedger()))

    assert first == second


@pytest.mark.asyncio
async def test_empty_arrays_are_a_valid_reply():
    provider = ScriptedProvider(
        CostLedger(), ['{"high_level_keywords": [], "low_level_keywords": []}']
    )

    keywords = await extract_query_keywords("anything?", provider)

    assert keywords.is_empty()


@pytest.mark.asyncio
async def test_unparseable_reply_gets_one_repair():
    ledger = CostLedger()
    provider = ScriptedProvider(ledger, ["I think the keywords are education.", GOOD])

    keywords = await extract_query_keywords("How does AI shape schools?", provider)

    assert keywords.high == ("education", "AI influence")
    assert ledger[Phase.RETRIEVE].api_calls == 2
    assert prompt_section(provider.prompts[1], "Format Reminder")


@pytest.mark.asyncio
async def test_still_unparseable_aborts_the_query():
    provider = ScriptedProvider(CostLedger(), ["nope", "still nope"])

    with pytest.raises(RagError) as exc_info:
        await extract_query_keywords("How does AI shape schools?", provider)

    assert exc_info.value.kind == RagErrorKind.KEYWORD_EXTRACTION
    assert exc_info.value.details["raw"] == "still nope"
    assert exc_info.value.exit_code == 6


@pytest.mark.asyncio
async def test_empty_query_is_rejected_without_a_call():
    ledger = CostLedger()

    with pytest.raises(RagError) as exc_info:
        await extract_query_keywords("   ", RuleBasedProvider(ledger))

    assert exc_info.value.kind == RagErrorKind.KEYWORD_EXTRACTION
    assert ledger.total_api_calls == 0


@pytest.mark.asyncio
async def test_provider_failure_is_a_retryable_keyword_error():
    provider = ScriptedProvider(CostLedger(), [httpx.ConnectError("down")])

    with pytest.raises(RagError) as exc_info:
        await extract_query_keywords("Who founded Rome?", provider)

    assert exc_info.value.kind == RagErrorKind.KEYWORD_EXTRACTION
    assert exc_info.value.retryable is True
    assert exc_info.value.details["cause"] == "PROVIDER"
