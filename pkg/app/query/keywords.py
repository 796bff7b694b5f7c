import logging
from typing import Any

from app.core.errors import RagError, RagErrorKind
from app.extract.parsing import parse_json_object
from app.llm.base import LlmProvider
from app.llm.constants import PromptTask
from app.llm.prompts import keyword_prompt, with_format_reminder
from app.model.ledger import Phase
from app.model.models import QueryKeywords, merge_keywords

from .constants import HIGH_LEVEL_FIELD, LOW_LEVEL_FIELD

logger = logging.getLogger(__name__)


def _string_list(data: dict[str, Any], field: str) -> tuple[str, ...]:
    value = data.get(field, [])
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise ValueError(f"{field} must be a list of strings")
    return merge_keywords((), value)


def parse_keywords(raw: str) -> QueryKeywords:
    """Read the keyword JSON object; missing fields count as empty lists.

    Raises:
        ValueError: If the reply holds no JSON object or a field is not a
            list of strings
    """
    data = parse_json_object(raw)
    if HIGH_LEVEL_FIELD not in data and LOW_LEVEL_FIELD not in data:
        raise ValueError("Reply has neither keyword field")
    return QueryKeywords(
        high=_string_list(data, HIGH_LEVEL_FIELD),
        low=_string_list(data, LOW_LEVEL_FIELD),
    )


async def _ask(provider: LlmProvider, prompt: str) -> str:
    try:
        return await provider.complete(
            prompt, phase=Phase.RETRIEVE, task=PromptTask.KEYWORD_EXTRACTION
        )
    except RagError as exc:
        if exc.kind != RagErrorKind.PROVIDER:
            raise
        raise exc.rewrap(RagErrorKind.KEYWORD_EXTRACTION, "Keyword extraction failed") from exc


async def extract_query_keywords(query: str, provider: LlmProvider) -> QueryKeywords:
    """Split a query into low-level and high-level keywords.

    One provider call, plus one format-reminder re-ask if the reply cannot
    be parsed. There is no fallback: a query whose keywords cannot be read
    is aborted.

    Raises:
        RagError: KEYWORD_EXTRACTION on an empty query, a failed call or a
            reply that stays unparseable
    """
    if not query.strip():
        raise RagError(message="Query is empty", kind=RagErrorKind.KEYWORD_EXTRACTION)

    prompt = keyword_prompt(query)
    raw = await _ask(provider, prompt)
    try:
        return parse_keywords(raw)
    except ValueError as exc:
        logger.warning("Unparseable keyword reply (%s), asking again", exc)

    raw = await _ask(provider, with_format_reminder(prompt))
    try:
        return parse_keywords(raw)
    except ValueError as exc:
        raise RagError(
            message=f"Keyword reply is not valid JSON keywords: {exc}",
            kind=RagErrorKind.KEYWORD_EXTRACTION,
            details={"raw": raw},
        ) from exc
