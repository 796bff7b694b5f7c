import logging
import re

HEAD_CHARS = 4
TAIL_CHARS = 4
ELLIPSIS = "..."

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

# Credentials that can show up in provider error bodies, request dumps or
# exception messages. The captured group is what gets condensed.
SECRET_PATTERNS = (
    re.compile(r"(?i)bearer\s+([A-Za-z0-9._~+/=-]+)"),
    re.compile(r"\b(sk-[A-Za-z0-9_-]{8,})"),
    re.compile(r"(?i)api[_-]?key[\"']?\s*[:=]\s*[\"']?([^\s\"'&,]+)"),
)


def condense_value(value: str) -> str:
    """Shorten a secret to ``head...tail`` (e.g. ``sk-a...wxyz``).

    Values too short to condense are fully masked instead: there is no safe
    prefix to keep.
    """
    if len(value) <= HEAD_CHARS + TAIL_CHARS + len(ELLIPSIS):
        return "*" * len(value)
    return f"{value[:HEAD_CHARS]}{ELLIPSIS}{value[-TAIL_CHARS:]}"


def redact_secrets(text: str) -> str:
    for pattern in SECRET_PATTERNS:
        text = pattern.sub(
            lambda m: m.group(0).replace(m.group(1), condense_value(m.group(1))),
            text,
        )
    return text


class RedactSecretsFilter(logging.Filter):
    """Rewrites a record's rendered message with credentials condensed.

    The record is formatted once here and its ``args`` cleared, so the
    downstream formatter only ever sees the redacted text.
    """

    def filter(self, record: logging.LogRecord) -> bool:
        message = record.getMessage()
        redacted = redact_secrets(message)
        if redacted != message:
            record.msg = redacted
            record.args = None
        return True


def install_secret_redaction(handler: logging.Handler) -> None:
    """Attach the redaction filter to a handler.

    Safe to call multiple times; the filter is only installed once.
    """
    if not any(isinstance(f, RedactSecretsFilter) for f in handler.filters):
        handler.addFilter(RedactSecretsFilter())


def configure_logging(level: str = "INFO") -> None:
    """Configure the root logger for CLI runs.

    Handler filters (not logger filters) are used so records propagated from
    every ``app.*`` logger pass through redaction.
    """
    root = logging.getLogger()
    root.setLevel(level.upper())
    if not root.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        root.addHandler(handler)
    for handler in root.handlers:
        install_secret_redaction(handler)
