import logging
from functools import cached_property

from app.config import Settings
from app.core.errors import RagError
from app.graph.storage import load, load_ledger, save_ledger
from app.graph.store import GraphStore
from app.ingest.tokens import TokenCounter, get_counter
from app.llm.base import LlmProvider
from app.llm.factory import create_provider
from app.model.ledger import CostLedger
from app.vectors.embedders import Embedder
from app.vectors.factory import create_embedder

logger = logging.getLogger(__name__)


class Runtime:
    """Everything one command needs, built lazily from validated settings.

    All providers share ``ledger``, which holds this run's costs only;
    ``record_costs`` folds it into the cumulative ledger kept next to the
    store.
    """

    def __init__(self, settings: Settings):
        self.settings = settings
        self.ledger = CostLedger(c_max=settings.provider.c_max)

    @cached_property
    def counter(self) -> TokenCounter:
        chunking = self.settings.chunking
        return get_counter(chunking.token_counter, chunking.tiktoken_encoding)

    @cached_property
    def provider(self) -> LlmProvider:
        return create_provider(self.settings.provider, self.ledger, self.counter)

    @cached_property
    def judge_provider(self) -> LlmProvider:
        return create_provider(self.settings.effective_judge_provider, self.ledger, self.counter)

    @cached_property
    def embedder(self) -> Embedder:
        return create_embedder(self.settings.embedder, self.ledger, self.counter)

    def load_store(self) -> GraphStore:
        return load(self.settings.storage.path)

    def load_store_or_empty(self) -> GraphStore:
        if not self.settings.storage.path.exists():
            return GraphStore()
        return self.load_store()

    def history(self) -> CostLedger:
        return load_ledger(self.settings.storage.ledger_path, self.settings.provider.c_max)

    def record_costs(self) -> None:
        """Persist the embedding cache and fold this run into the history.

        Failures are logged, not raised, so they never mask the command's
        own outcome.
        """
        if "embedder" in self.__dict__:
            self.embedder.cache.flush()
        if not self.ledger.total_api_calls and not any(
            cost.embed_tokens for cost in self.ledger.snapshot().values()
        ):
            return
        try:
            history = self.history()
            history.absorb(self.ledger)
            save_ledger(history, self.settings.storage.ledger_path)
        except RagError as exc:
            logger.warning("Could not record run costs: %s", exc.message)
