import logging

from app.config import ChunkingConfig
from app.model.models import Chunk, DocumentId

from .tokens import TokenCounter, get_counter

logger = logging.getLogger(__name__)


def chunk_document(
    doc: DocumentId,
    text: str,
    cfg: ChunkingConfig,
    counter: TokenCounter | None = None,
) -> list[Chunk]:
    """Split a document into fixed-size token windows.

    Windows start every ``chunk_size - overlap`` tokens and the last window
    ends at the end of the token stream. Boundaries fall on tokens only.

    Args:
        doc: Document id, used as the ChunkId prefix
        text: Raw document text
        cfg: Validated chunking configuration
        counter: Token counter; defaults to the one named by ``cfg``

    Returns:
        Chunks in document order; empty for a document without tokens. A
        chunk's ``token_count`` is the counter's count of its decoded text,
        which differs from the window length when a byte-level window splits
        a character.
    """
    counter = counter or get_counter(cfg.token_counter, cfg.tiktoken_encoding)
    tokens = counter.encode(text)
    if not tokens:
        return []

    stride = cfg.chunk_size - cfg.overlap
    chunks: list[Chunk] = []
    for index, start in enumerate(range(0, len(tokens), stride)):
        end = min(start + cfg.chunk_size, len(tokens))
        window = tokens[start:end]
        text = counter.decode(window)
        chunks.append(
            Chunk.create(doc=doc, index=index, text=text, token_count=counter.count(text))
        )
        if end == len(tokens):
            break

    logger.debug("Chunked %s: %d tokens into %d chunks", doc, len(tokens), len(chunks))
    return chunks
