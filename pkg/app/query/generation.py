from app.core.errors import RagError, RagErrorKind
from app.llm.base import LlmProvider
from app.llm.constants import PromptTask
from app.llm.prompts import graph_answer_prompt, naive_answer_prompt
from app.model.ledger import Phase


async def answer(
    query: str,
    rendered_context: str,
    provider: LlmProvider,
    *,
    naive: bool = False,
) -> str:
    """Answer ``query`` from the rendered context with one provider call.

    The call is made even for an empty context; the reply is returned
    verbatim.

    Raises:
        RagError: GENERATION (retryable when the provider failure is)
    """
    if naive:
        prompt, task = naive_answer_prompt(query, rendered_context), PromptTask.NAIVE_ANSWER
    else:
        prompt, task = graph_answer_prompt(query, rendered_context), PromptTask.GRAPH_ANSWER
    try:
        return await provider.complete(prompt, phase=Phase.GENERATE, task=task)
    except RagError as exc:
        if exc.kind != RagErrorKind.PROVIDER:
            raise
        raise exc.rewrap(RagErrorKind.GENERATION, "Answer generation failed") from exc
