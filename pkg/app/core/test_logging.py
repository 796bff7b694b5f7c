import logging

from app.core.logging import (
    RedactSecretsFilter,
    condense_value,
    configure_logging,
    install_secret_redaction,
    redact_secrets,
)

API_KEY = "sk-proj-abcdefghijklmnopqrstuvwxyz0123"


def test_condense_value_keeps_head_and_tail():
    assert condense_value(API_KEY) == "sk-p...0123"


def test_condense_value_masks_short_values():
    assert condense_value("abc") == "***"
    assert condense_value("") == ""


def test_redacts_bearer_header():
    text = f"Authorization: Bearer {API_KEY}"
    assert redact_secrets(text) == "Authorization: Bearer sk-p...0123"


def test_redacts_api_key_assignment():
    assert redact_secrets("api_key=supersecretvalue42") == "api_key=supe...ue42"


def test_leaves_plain_text_untouched():
    text = "Extracted 12 entities from chunk notes.txt#3"
    assert redact_secrets(text) == text


def _record(msg: str, args=None) -> logging.LogRecord:
    return logging.LogRecord(
        name="app.llm.openai_compat.client",
        level=logging.WARNING,
        pathname=__file__,
        lineno=0,
        msg=msg,
        args=args,
        exc_info=None,
    )


def test_filter_rewrites_formatted_message():
    record = _record("Provider rejected key %s", (API_KEY,))

    assert RedactSecretsFilter().filter(record) is True

    assert record.args is None
    assert API_KEY not in record.getMessage()
    assert "sk-p...0123" in record.getMessage()


def test_filter_keeps_args_when_nothing_to_redact():
    record = _record("Indexed %d chunks", (3,))

    assert RedactSecretsFilter().filter(record) is True
    assert record.args == (3,)


def test_install_is_idempotent():
    handler = logging.StreamHandler()
    install_secret_redaction(handler)
    install_secret_redaction(handler)

    matching = [f for f in handler.filters if isinstance(f, RedactSecretsFilter)]
    assert len(matching) == 1


def test_configure_logging_installs_filter_on_root_handlers():
    root = logging.getLogger()
    original_handlers = list(root.handlers)
    original_level = root.level
    try:
        root.handlers = []
        configure_logging("debug")
        assert root.level == logging.DEBUG
        assert root.handlers
        assert all(
            any(isinstance(f, RedactSecretsFilter) for f in h.filters)
            for h in root.handlers
        )
    finally:
        root.handlers = original_handlers
        root.setLevel(original_level)
