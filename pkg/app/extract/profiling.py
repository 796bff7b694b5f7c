import asyncio
import logging
from collections.abc import Sequence

from app.config import ExtractionSettings
from app.core.errors import RagError, RagErrorKind
from app.llm.base import LlmProvider
from app.llm.constants import PromptTask
from app.llm.prompts import entity_profile_prompt, relation_profile_prompt, summarize_prompt
from app.model.ledger import Phase
from app.model.models import Entity, KvRecord, Relation, merge_keywords

from .parsing import parse_json_object

logger = logging.getLogger(__name__)

FALLBACK_RELATION_KEY = "related"
MAX_FALLBACK_KEYS = 3


async def _complete(provider: LlmProvider, prompt: str, task: PromptTask, subject: str) -> str:
    try:
        return await provider.complete(prompt, phase=Phase.PROFILE, task=task)
    except RagError as exc:
        if exc.kind != RagErrorKind.PROVIDER:
            raise
        raise exc.rewrap(RagErrorKind.PROFILING, f"Profiling failed for {subject}") from exc


def _relation_keys_and_value(relation: Relation, raw: str) -> tuple[tuple[str, ...], str]:
    try:
        data = parse_json_object(raw)
        keys = merge_keywords((), (k for k in data.get("keys", []) if isinstance(k, str)))
        value = data.get("value")
        value = value.strip() if isinstance(value, str) else ""
    except ValueError:
        logger.warning("Relation profile for %s is not JSON, using fallbacks", relation.id)
        keys, value = (), raw.strip()

    if not keys:
        keys = relation.keywords[:MAX_FALLBACK_KEYS] or (FALLBACK_RELATION_KEY,)
    return keys, value or relation.description or str(relation.id)


async def _maybe_resummarize(
    provider: LlmProvider, name: str, value: str, options: ExtractionSettings
) -> str:
    if not options.resummarize or provider.counter.count(value) <= options.summary_max_tokens:
        return value
    summary = await _complete(
        provider,
        summarize_prompt(name, value, options.summary_max_tokens),
        PromptTask.SUMMARIZE,
        name,
    )
    return summary.strip() or value


async def profile(
    item: Entity | Relation,
    provider: LlmProvider,
    options: ExtractionSettings | None = None,
) -> KvRecord:
    """Generate the key-value record of a merged entity or relation.

    Entities are keyed by their name; relations by the theme keys the
    provider returns. One provider call per item, plus one summary call when
    re-summarization is on and the value is too long.

    Raises:
        RagError: PROFILING (retryable when the provider failure is)
    """
    options = options or ExtractionSettings()
    if isinstance(item, Entity):
        raw = await _complete(
            provider, entity_profile_prompt(item), PromptTask.ENTITY_PROFILE, item.id
        )
        keys: tuple[str, ...] = (item.name,)
        value = raw.strip() or item.description or item.name
    else:
        raw = await _complete(
            provider, relation_profile_prompt(item), PromptTask.RELATION_PROFILE, str(item.id)
        )
        keys, value = _relation_keys_and_value(item, raw)

    value = await _maybe_resummarize(provider, str(item.id), value, options)
    return KvRecord(
        keys=keys,
        value=value,
        subject=item.id,
        fingerprint=item.content_fingerprint(),
    )


async def profile_items(
    items: Sequence[Entity | Relation],
    provider: LlmProvider,
    options: ExtractionSettings | None = None,
) -> list[KvRecord]:
    records = await asyncio.gather(*(profile(item, provider, options) for item in items))
    return list(records)
