import os
from pathlib import Path
from unittest.mock import patch

import pytest

from app.config import (
    ChunkingConfig,
    ProviderKind,
    RetrievalMode,
    Settings,
    load_settings,
)
from app.core.errors import RagError, RagErrorKind


def test_defaults_carry_reference_values():
    settings = load_settings()

    assert settings.chunking.chunk_size == 1200
    assert settings.chunking.overlap == 100
    assert settings.extraction.gleaning == 1
    assert settings.retrieval.top_k == 20
    assert settings.retrieval.budget_tokens == 8000
    assert settings.retrieval.mode == RetrievalMode.HYBRID
    assert settings.provider.kind == ProviderKind.MOCK
    assert settings.embedder.dimension == 128


def test_overlap_must_be_below_chunk_size():
    with pytest.raises(ValueError):
        ChunkingConfig(chunk_size=100, overlap=100)


def test_toml_file_is_layered(tmp_path: Path):
    config = tmp_path / "rag.toml"
    config.write_text(
        """
[chunking]
chunk_size = 300
overlap = 0

[retrieval]
top_k = 5
mode = "local"

[storage]
path = "store/graph.ndjson"
""",
        encoding="utf-8",
    )

    settings = load_settings(config)

    assert isinstance(settings, Settings)
    assert settings.chunking.chunk_size == 300
    assert settings.chunking.overlap == 0
    assert settings.retrieval.top_k == 5
    assert settings.retrieval.mode == RetrievalMode.LOCAL
    assert settings.storage.path == Path("store/graph.ndjson")
    assert settings.storage.ledger_path == Path("store/graph.ndjson.ledger.json")


def test_environment_overrides_toml(tmp_path: Path):
    config = tmp_path / "rag.toml"
    config.write_text("[retrieval]\ntop_k = 5\n", encoding="utf-8")

    with patch.dict(os.environ, {"RETRIEVAL__TOP_K": "9"}):
        settings = load_settings(config)

    assert settings.retrieval.top_k == 9


def test_invalid_config_names_the_field(tmp_path: Path):
    config = tmp_path / "rag.toml"
    config.write_text("[chunking]\nchunk_size = 100\noverlap = 400\n", encoding="utf-8")

    with pytest.raises(RagError) as exc_info:
        load_settings(config)

    assert exc_info.value.kind == RagErrorKind.INVALID_CONFIG
    assert "chunking" in exc_info.value.message


def test_invalid_field_type_names_the_field():
    with pytest.raises(RagError) as exc_info:
        load_settings(retrieval={"top_k": 0})

    assert "retrieval.top_k" in exc_info.value.message


def test_missing_config_file_is_a_config_error(tmp_path: Path):
    with pytest.raises(RagError) as exc_info:
        load_settings(tmp_path / "absent.toml")

    assert exc_info.value.kind == RagErrorKind.INVALID_CONFIG


def test_judge_provider_falls_back_to_answer_provider():
    settings = load_settings()
    assert settings.effective_judge_provider == settings.provider

    settings = load_settings(judge_provider={"kind": "mock", "judge_policy": "position_a"})
    assert settings.effective_judge_provider.judge_policy == "position_a"
