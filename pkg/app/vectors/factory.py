import logging

from app.config import EmbedderKind, EmbedderSettings
from app.ingest.tokens import TokenCounter
from app.model.ledger import CostLedger

from .cache import EmbeddingCache
from .embedders import Embedder, HashingEmbedder
from .openai_embedder import OpenAICompatEmbedder

logger = logging.getLogger(__name__)


def create_embedder(
    settings: EmbedderSettings,
    ledger: CostLedger,
    counter: TokenCounter | None = None,
) -> Embedder:
    """Build the embedder named by ``settings.kind`` with its cache.

    Raises:
        RagError: INVALID_CONFIG when a remote embedder's API key is missing
    """
    cache = EmbeddingCache(maxsize=settings.cache_size, path=settings.cache_path)
    logger.debug("Creating %s embedder", settings.kind.value)
    match settings.kind:
        case EmbedderKind.HASHING:
            return HashingEmbedder(ledger, settings.dimension, cache, counter)
        case EmbedderKind.OPENAI:
            return OpenAICompatEmbedder(settings, ledger, cache, counter)
        case _:
            raise ValueError(f"Unknown embedder kind: {settings.kind}")
