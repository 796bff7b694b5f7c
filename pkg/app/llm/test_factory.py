import os
from unittest.mock import patch

from app.config import JudgePolicy, ProviderSettings
from app.model.ledger import CostLedger

from .factory import create_provider
from .mocks import CARDIOLOGY_OVERRIDES
from .openai_compat.client import OpenAICompatProvider
from .rule_based.client import RuleBasedProvider


def test_mock_provider_carries_settings():
    settings = ProviderSettings(per_pass_limit=3, judge_policy=JudgePolicy.POSITION_B)

    provider = create_provider(settings, CostLedger(), overrides=CARDIOLOGY_OVERRIDES)

    assert isinstance(provider, RuleBasedProvider)
    assert provider.per_pass_limit == 3
    assert provider.judge_policy == JudgePolicy.POSITION_B
    assert provider.overrides == CARDIOLOGY_OVERRIDES


def test_openai_provider_reads_key_from_named_variable():
    settings = ProviderSettings(kind="openai", api_key_env="CUSTOM_KEY_VAR")

    with patch.dict(os.environ, {"CUSTOM_KEY_VAR": "sk-abcdef"}):
        provider = create_provider(settings, CostLedger())

    assert isinstance(provider, OpenAICompatProvider)
    assert provider.provider_id == "openai:gpt-4o-mini"
