import logging
from collections.abc import Sequence

from pydantic import BaseModel

from app.config import Settings
from app.extract.extractor import extract_chunks
from app.extract.profiling import profile_items
from app.ingest.chunking import chunk_document
from app.ingest.corpus import Document
from app.ingest.tokens import get_counter
from app.llm.base import LlmProvider
from app.model.ledger import Phase
from app.model.models import Chunk, KvRecord

from .dedupe import dedupe_merge
from .store import GraphDelta, GraphItem, GraphStore, merge_incremental

logger = logging.getLogger(__name__)


class IndexReport(BaseModel):
    documents: int
    chunks_total: int
    chunks_extracted: int
    chunks_skipped: int
    entities_added: int
    relations_added: int
    quarantined: int
    version: int


def pending_chunks(store: GraphStore, chunks: Sequence[Chunk]) -> list[Chunk]:
    """Chunks not yet in the store with identical content."""
    return [
        chunk
        for chunk in chunks
        if (known := store.chunks.get(chunk.id)) is None
        or known.content_hash != chunk.content_hash
    ]


async def index_documents(
    store: GraphStore,
    documents: Sequence[Document],
    provider: LlmProvider,
    settings: Settings,
    phase: Phase = Phase.INDEX,
) -> tuple[GraphStore, IndexReport]:
    """Chunk, extract, deduplicate and merge one batch of documents.

    Chunks already stored with the same content are neither extracted nor
    re-merged, so re-running over an unchanged corpus costs no extraction
    calls. The batch commits as a single new store version.

    Args:
        store: Current committed store (an empty one for a fresh index)
        documents: Documents of this batch
        provider: Provider for extraction and profiling calls
        settings: Chunking and extraction settings
        phase: Ledger phase for extraction calls (index or update)

    Returns:
        The next store version and a summary of the batch
    """
    counter = get_counter(settings.chunking.token_counter, settings.chunking.tiktoken_encoding)
    chunks = [
        chunk
        for document in documents
        for chunk in chunk_document(document.id, document.text, settings.chunking, counter)
    ]
    todo = pending_chunks(store, chunks)
    logger.info(
        "Indexing %d documents: %d chunks, %d already stored",
        len(documents),
        len(chunks),
        len(chunks) - len(todo),
    )

    results = await extract_chunks(
        todo,
        provider,
        settings.extraction.gleaning,
        entity_types=settings.extraction.entity_types,
        phase=phase,
    )
    batch = dedupe_merge(results, store.graph)

    async def profiler(items: Sequence[GraphItem]) -> list[KvRecord]:
        return await profile_items(items, provider, settings.extraction)

    merged = await merge_incremental(
        store, GraphDelta(graph=batch.graph, chunks=todo), profiler
    )
    report = IndexReport(
        documents=len(documents),
        chunks_total=len(chunks),
        chunks_extracted=len(todo),
        chunks_skipped=len(chunks) - len(todo),
        entities_added=len(merged.graph.entities) - len(store.graph.entities),
        relations_added=len(merged.graph.relations) - len(store.graph.relations),
        quarantined=len(batch.quarantined),
        version=merged.version,
    )
    logger.info(
        "Committed store version %d (+%d entities, +%d relations)",
        report.version,
        report.entities_added,
        report.relations_added,
    )
    return merged, report
