import logging

from app.config import RetrievalSettings
from app.graph.store import GraphStore
from app.ingest.tokens import TokenCounter, get_counter
from app.llm.base import LlmProvider
from app.model.ledger import Phase, PhaseCost
from app.model.models import QueryKeywords
from app.vectors.embedders import Embedder
from app.vectors.index import IndexSet, build_index

from .context import fit_to_budget, render_context
from .generation import answer
from .keywords import extract_query_keywords
from .models import QueryMode, QueryTrace
from .retrieval import check_fresh, retrieve

logger = logging.getLogger(__name__)

# Phases a query is charged to; always present in a trace even when zero
QUERY_PHASES = (Phase.RETRIEVE, Phase.GENERATE)


class QueryEngine:
    """Answers queries against one committed store version.

    The engine holds no per-query state, so one instance serves any number
    of queries (the evaluation harness answers a whole question set with
    it).
    """

    def __init__(
        self,
        store: GraphStore,
        indexes: IndexSet,
        provider: LlmProvider,
        embedder: Embedder,
        settings: RetrievalSettings,
        counter: TokenCounter | None = None,
    ):
        check_fresh(store, indexes)
        self.store = store
        self.indexes = indexes
        self.provider = provider
        self.embedder = embedder
        self.settings = settings
        self.counter = counter or get_counter()

    @classmethod
    async def open(
        cls,
        store: GraphStore,
        provider: LlmProvider,
        embedder: Embedder,
        settings: RetrievalSettings,
        counter: TokenCounter | None = None,
    ) -> "QueryEngine":
        """Build the vector indexes for ``store`` and wrap them in an engine.

        Index embeddings are charged to the index phase; with a warm
        embedding cache they cost nothing.
        """
        indexes = await build_index(store, embedder, phase=Phase.INDEX)
        return cls(store, indexes, provider, embedder, settings, counter)

    def default_mode(self) -> QueryMode:
        return QueryMode(
            mode=self.settings.mode, include_origin_text=self.settings.include_origin_text
        )

    async def query(self, question: str, mode: QueryMode | None = None) -> QueryTrace:
        """Run keyword extraction, retrieval, context assembly and generation.

        Naive mode skips keyword extraction, so its only provider call is
        the answer.

        Raises:
            RagError: KEYWORD_EXTRACTION, EMBEDDING, STALE_INDEX or GENERATION
                from the failing step; nothing is retried here
        """
        mode = mode or self.default_mode()
        with self.provider.ledger.scoped() as spent:
            keywords = None
            if mode.uses_graph:
                keywords = await extract_query_keywords(question, self.provider)
            retrieved = await retrieve(
                self.store,
                self.indexes,
                self.embedder,
                keywords or QueryKeywords(),
                mode,
                self.settings.top_k,
                query=question,
                budget_tokens=self.settings.budget_tokens,
            )
            fitted = fit_to_budget(retrieved, self.counter)
            context = render_context(fitted)
            reply = await answer(question, context, self.provider, naive=not mode.uses_graph)

        delta = spent.snapshot()
        keyword_tokens = delta[Phase.RETRIEVE].tokens_in if keywords is not None else None
        bound = self.settings.keyword_prompt_token_bound
        if keyword_tokens is not None and keyword_tokens > bound:
            logger.warning(
                "Keyword prompt used %d tokens, above the bound of %d",
                keyword_tokens,
                bound,
            )

        trace = QueryTrace(
            query=question,
            mode=mode.mode,
            include_origin_text=mode.include_origin_text,
            keywords=keywords,
            entity_ids=[str(item.entity.id) for item in fitted.entities],
            relation_ids=[str(item.relation.id) for item in fitted.relations],
            chunk_ids=[str(chunk.id) for chunk in fitted.chunks],
            context=context,
            answer=reply,
            store_version=self.store.version,
            keyword_prompt_tokens=keyword_tokens,
            cost={
                phase: cost
                for phase, cost in delta.items()
                if phase in QUERY_PHASES or cost != PhaseCost()
            },
        )
        logger.info(
            "Answered %s query with %d provider calls",
            mode.mode.value,
            sum(cost.api_calls for cost in delta.values()),
        )
        return trace
