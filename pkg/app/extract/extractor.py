import asyncio
import logging
from collections.abc import Sequence

from app.core.errors import RagError, RagErrorKind
from app.llm.base import LlmProvider
from app.llm.constants import PromptTask
from app.llm.prompts import extraction_prompt, gleaning_prompt, with_format_reminder
from app.model.constants import DEFAULT_ENTITY_TYPES
from app.model.ledger import Phase
from app.model.models import Chunk, EntityId, RelationId, normalize_entity_name

from .models import ExtractionResult
from .parsing import parse_extraction_output, strip_completion

logger = logging.getLogger(__name__)


async def _run_pass(
    chunk: Chunk,
    provider: LlmProvider,
    prompt: str,
    task: PromptTask,
    phase: Phase,
) -> tuple[str, ExtractionResult]:
    """One extraction call, plus a single format-reminder re-ask on parse failure."""
    raw = await _call(chunk, provider, prompt, task, phase)
    if not strip_completion(raw):
        return raw, ExtractionResult(chunk=chunk.id)
    try:
        return raw, parse_extraction_output(raw)
    except RagError as exc:
        if exc.kind != RagErrorKind.PARSE:
            raise
        logger.warning("Unparseable extraction output for %s, re-asking once", chunk.id)

    raw = await _call(chunk, provider, with_format_reminder(prompt), task, phase)
    if not strip_completion(raw):
        return raw, ExtractionResult(chunk=chunk.id)
    try:
        return raw, parse_extraction_output(raw)
    except RagError as exc:
        exc.details["chunk"] = str(chunk.id)
        raise


async def _call(
    chunk: Chunk, provider: LlmProvider, prompt: str, task: PromptTask, phase: Phase
) -> str:
    try:
        return await provider.complete(prompt, phase=phase, task=task)
    except RagError as exc:
        if exc.kind != RagErrorKind.PROVIDER:
            raise
        raise exc.rewrap(
            RagErrorKind.EXTRACTION, f"Extraction failed for chunk {chunk.id}", chunk=str(chunk.id)
        ) from exc


def union_passes(chunk: Chunk, passes: Sequence[ExtractionResult]) -> ExtractionResult:
    """Union pass results by normalized name / endpoint pair, first pass wins."""
    merged = ExtractionResult(chunk=chunk.id)
    seen_entities: set[EntityId] = set()
    seen_relations: set[RelationId] = set()

    for result in passes:
        merged.warnings += result.warnings
        for entity in result.entities:
            key = normalize_entity_name(entity.name)
            if key not in seen_entities:
                seen_entities.add(key)
                merged.entities.append(entity)
        for relation in result.relations:
            source = normalize_entity_name(relation.source)
            target = normalize_entity_name(relation.target)
            if source == target:
                merged.warnings += 1
                continue
            key = RelationId.of(source, target)
            if key not in seen_relations:
                seen_relations.add(key)
                merged.relations.append(relation)
    return merged


async def extract_chunk(
    chunk: Chunk,
    provider: LlmProvider,
    gleaning: int = 1,
    *,
    entity_types: Sequence[str] = DEFAULT_ENTITY_TYPES,
    phase: Phase = Phase.INDEX,
) -> ExtractionResult:
    """Recognize entities and relations in one chunk.

    Issues one extraction call followed by ``gleaning`` continuation calls
    that see everything found so far. An empty reply is a valid empty pass.

    Raises:
        RagError: EXTRACTION (retryable when the provider failure is) or PARSE
            when a reply stays malformed after the format reminder
    """
    prompt = extraction_prompt(chunk.text, entity_types)
    raw, result = await _run_pass(chunk, provider, prompt, PromptTask.ENTITY_EXTRACTION, phase)
    outputs, passes = [raw], [result]

    for _ in range(gleaning):
        prompt = gleaning_prompt(chunk.text, entity_types, "\n".join(outputs))
        raw, result = await _run_pass(chunk, provider, prompt, PromptTask.GLEANING, phase)
        outputs.append(raw)
        passes.append(result)

    return union_passes(chunk, passes)


async def extract_chunks(
    chunks: Sequence[Chunk],
    provider: LlmProvider,
    gleaning: int = 1,
    *,
    entity_types: Sequence[str] = DEFAULT_ENTITY_TYPES,
    phase: Phase = Phase.INDEX,
) -> list[ExtractionResult]:
    """Extract all chunks concurrently; results come back in chunk order."""
    results = await asyncio.gather(
        *(
            extract_chunk(chunk, provider, gleaning, entity_types=entity_types, phase=phase)
            for chunk in chunks
        )
    )
    logger.info(
        "Extracted %d entities and %d relations from %d chunks",
        sum(len(r.entities) for r in results),
        sum(len(r.relations) for r in results),
        len(chunks),
    )
    return list(results)
