import logging

from app.ingest.tokens import TokenCounter, get_counter
from app.model.models import Chunk

from .constants import ENTITIES_HEADER, RELATIONSHIPS_HEADER, SOURCES_HEADER
from .models import RetrievalContext, RetrievedEntity, RetrievedRelation

logger = logging.getLogger(__name__)


def _one_line(text: str) -> str:
    return " ".join(text.split())


def entity_line(item: RetrievedEntity) -> str:
    entity = item.entity
    value = item.profile.value if item.profile else entity.description
    return _one_line(f"{entity.name} ({entity.entity_type}): {value or entity.name}")


def relation_line(item: RetrievedRelation) -> str:
    relation = item.relation
    if item.profile:
        keys = item.profile.keys
    else:
        keys = relation.global_keys or relation.keywords
    value = item.profile.value if item.profile else relation.description
    return _one_line(
        f"{relation.source} -- {relation.target} [{', '.join(keys)}]: {value}"
    )


def source_line(chunk: Chunk) -> str:
    return _one_line(f"[{chunk.id}] {chunk.text}")


def render_context(ctx: RetrievalContext) -> str:
    """Render the three context sections in fixed order, one item per line."""
    lines = [ENTITIES_HEADER]
    lines += [entity_line(item) for item in ctx.entities]
    lines.append(RELATIONSHIPS_HEADER)
    lines += [relation_line(item) for item in ctx.relations]
    lines.append(SOURCES_HEADER)
    lines += [source_line(chunk) for chunk in ctx.chunks]
    return "\n".join(lines)


def _pop_lowest(sections: tuple[list, ...], costs: tuple[list[int], ...]) -> int | None:
    """Drop the tail item of the last nonempty section and return its cost."""
    for items, item_costs in zip(reversed(sections), reversed(costs), strict=True):
        if items:
            items.pop()
            return item_costs.pop()
    return None


def fit_to_budget(
    ctx: RetrievalContext, counter: TokenCounter | None = None
) -> RetrievalContext:
    """Drop the lowest-ranked items until the rendering fits the budget.

    Sources go first, then relationships, then entities, each from the
    tail. Section headers are always kept.

    Every line is counted once and dropped lines are subtracted from the
    running total. The finished rendering is then recounted as a whole, and
    dropping continues if a counter that is not additive across line breaks
    still finds it over budget.
    """
    counter = counter or get_counter()
    fitted = ctx.model_copy(
        update={
            "entities": list(ctx.entities),
            "relations": list(ctx.relations),
            "chunks": list(ctx.chunks),
        }
    )
    sections = (fitted.entities, fitted.relations, fitted.chunks)
    costs = (
        [counter.count(entity_line(item)) for item in fitted.entities],
        [counter.count(relation_line(item)) for item in fitted.relations],
        [counter.count(source_line(chunk)) for chunk in fitted.chunks],
    )
    headers = (ENTITIES_HEADER, RELATIONSHIPS_HEADER, SOURCES_HEADER)
    total = sum(counter.count(header) for header in headers) + sum(map(sum, costs))

    dropped = 0
    while total > fitted.budget_tokens:
        cost = _pop_lowest(sections, costs)
        if cost is None:
            break
        total -= cost
        dropped += 1
    while counter.count(render_context(fitted)) > fitted.budget_tokens:
        if _pop_lowest(sections, costs) is None:
            break
        dropped += 1
    if dropped:
        logger.info("Dropped %d context items to fit %d tokens", dropped, ctx.budget_tokens)
    return fitted


def assemble_context(ctx: RetrievalContext, counter: TokenCounter | None = None) -> str:
    return render_context(fit_to_budget(ctx, counter))
