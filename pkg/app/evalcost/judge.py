import logging
import re
from typing import Any

from app.core.errors import RagError, RagErrorKind
from app.extract.parsing import parse_json_object
from app.llm.base import LlmProvider
from app.llm.constants import PromptTask
from app.llm.prompts import judge_prompt, with_format_reminder
from app.model.ledger import Phase

from .constants import (
    DIMENSIONS,
    EXPLANATION_FIELD,
    OVERALL_FIELD,
    SYSTEM_1,
    SYSTEM_2,
    WINNER_FIELD,
)
from .models import DimensionVerdict, JudgeVerdict, Position

logger = logging.getLogger(__name__)

# Judges decorate the slot name, e.g. "Answer 2 (graph retrieval)"
_WINNER = re.compile(r"Answer\s*([12])", re.IGNORECASE)


def _dimension(data: dict[str, Any], field: str) -> DimensionVerdict:
    entry = data.get(field)
    if not isinstance(entry, dict):
        raise ValueError(f"missing {field!r}")
    winner = entry.get(WINNER_FIELD)
    match = _WINNER.search(winner) if isinstance(winner, str) else None
    if match is None:
        raise ValueError(f"{field!r} names no winner: {winner!r}")
    explanation = entry.get(EXPLANATION_FIELD, "")
    return DimensionVerdict(
        winner=Position.FIRST if match.group(1) == "1" else Position.SECOND,
        explanation=explanation if isinstance(explanation, str) else str(explanation),
    )


def parse_verdict(
    raw: str, first_system: str = SYSTEM_1, second_system: str = SYSTEM_2
) -> JudgeVerdict:
    """Read a judge reply into per-dimension winners.

    Raises:
        ValueError: If the reply holds no JSON object, or a dimension or the
            overall winner is missing
    """
    data = parse_json_object(raw)
    return JudgeVerdict(
        dimensions={d: _dimension(data, d) for d in DIMENSIONS},
        overall=_dimension(data, OVERALL_FIELD),
        first_system=first_system,
        second_system=second_system,
    )


async def _ask(provider: LlmProvider, prompt: str) -> str:
    try:
        return await provider.complete(prompt, phase=Phase.EVALUATE, task=PromptTask.JUDGE)
    except RagError as exc:
        if exc.kind != RagErrorKind.PROVIDER:
            raise
        raise exc.rewrap(RagErrorKind.JUDGE, "Judge call failed") from exc


async def judge_pair(
    question: str,
    answer_a: str,
    answer_b: str,
    provider: LlmProvider,
    *,
    first_system: str = SYSTEM_1,
    second_system: str = SYSTEM_2,
) -> JudgeVerdict:
    """Ask the judge which of two answers is better on every dimension.

    ``answer_a`` is shown first. A malformed verdict gets one repair re-ask;
    no winner is ever assumed.

    Raises:
        RagError: JUDGE for an empty answer, a failed call or a verdict that
            stays malformed
    """
    if not answer_a.strip() or not answer_b.strip():
        raise RagError(message="Cannot judge an empty answer", kind=RagErrorKind.JUDGE)

    prompt = judge_prompt(question, answer_a, answer_b)
    raw = await _ask(provider, prompt)
    try:
        return parse_verdict(raw, first_system, second_system)
    except ValueError as exc:
        logger.warning("Malformed verdict (%s), asking again", exc)

    raw = await _ask(provider, with_format_reminder(prompt))
    try:
        return parse_verdict(raw, first_system, second_system)
    except ValueError as exc:
        raise RagError(
            message=f"Judge verdict is malformed: {exc}",
            kind=RagErrorKind.JUDGE,
            details={"raw": raw},
        ) from exc
