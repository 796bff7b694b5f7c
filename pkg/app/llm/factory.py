import logging
from collections.abc import Mapping

from app.config import ProviderKind, ProviderSettings
from app.ingest.tokens import TokenCounter
from app.model.ledger import CostLedger

from .base import LlmProvider
from .openai_compat.client import OpenAICompatProvider
from .rule_based.client import RuleBasedProvider

logger = logging.getLogger(__name__)


def create_provider(
    settings: ProviderSettings,
    ledger: CostLedger,
    counter: TokenCounter | None = None,
    overrides: Mapping[str, str] | None = None,
) -> LlmProvider:
    """Build the provider named by ``settings.kind``.

    Raises:
        RagError: INVALID_CONFIG when a remote provider's API key is missing
    """
    logger.debug("Creating %s provider", settings.kind.value)
    match settings.kind:
        case ProviderKind.MOCK:
            return RuleBasedProvider(
                ledger,
                counter,
                max_in_flight=settings.max_in_flight,
                per_pass_limit=settings.per_pass_limit,
                judge_policy=settings.judge_policy,
                overrides=overrides,
            )
        case ProviderKind.OPENAI:
            return OpenAICompatProvider(settings, ledger, counter)
        case _:
            raise ValueError(f"Unknown provider kind: {settings.kind}")
