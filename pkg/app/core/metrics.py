"""Prometheus metrics for provider traffic and indexing health.

The CostLedger is the source of truth for cost invariants; these series
mirror it for dashboards and add what the ledger does not track (latency,
transport retries, failures).
"""

from pathlib import Path

from prometheus_client import REGISTRY, Counter, Gauge, Histogram, write_to_textfile

from app.model.ledger import CostLedger

DURATION_BUCKETS = (0.01, 0.05, 0.1, 0.25, 0.5, 1.0, 2.5, 5.0, 10.0, 30.0, 60.0)

rag_provider_calls_total = Counter(
    "rag_provider_calls_total",
    "Total number of language-model provider calls",
    labelnames=["phase", "task", "status"],
)

rag_provider_tokens_total = Counter(
    "rag_provider_tokens_total",
    "Tokens exchanged with the language-model provider",
    labelnames=["phase", "direction"],
)

rag_provider_call_duration_seconds = Histogram(
    "rag_provider_call_duration_seconds",
    "Latency of language-model provider calls",
    labelnames=["phase", "task"],
    buckets=DURATION_BUCKETS,
)

rag_embedding_tokens_total = Counter(
    "rag_embedding_tokens_total",
    "Tokens sent to the embedder",
    labelnames=["phase"],
)

rag_http_retries_total = Counter(
    "rag_http_retries_total",
    "Transport-level retries against provider endpoints",
    labelnames=["host"],
)

rag_quarantined_relations_total = Counter(
    "rag_quarantined_relations_total",
    "Extracted relations dropped because an endpoint entity was unknown",
)


# Cumulative ledger of a store, exported by the stats command
rag_ledger_tokens = Gauge(
    "rag_ledger_tokens",
    "Cumulative tokens recorded in the cost ledger",
    labelnames=["phase", "direction"],
)

rag_ledger_api_calls = Gauge(
    "rag_ledger_api_calls",
    "Cumulative provider calls recorded in the cost ledger",
    labelnames=["phase"],
)


def record_provider_call(
    phase: str,
    task: str,
    duration: float,
    success: bool,
    tokens_in: int = 0,
    tokens_out: int = 0,
) -> None:
    status = "success" if success else "error"
    rag_provider_calls_total.labels(phase=phase, task=task, status=status).inc()
    rag_provider_call_duration_seconds.labels(phase=phase, task=task).observe(duration)
    if tokens_in:
        rag_provider_tokens_total.labels(phase=phase, direction="in").inc(tokens_in)
    if tokens_out:
        rag_provider_tokens_total.labels(phase=phase, direction="out").inc(tokens_out)


def record_embedding_tokens(phase: str, tokens: int) -> None:
    if tokens:
        rag_embedding_tokens_total.labels(phase=phase).inc(tokens)


def record_http_retry(host: str) -> None:
    rag_http_retries_total.labels(host=host).inc()


def record_quarantined_relations(count: int) -> None:
    if count:
        rag_quarantined_relations_total.inc(count)


def export_ledger(ledger: CostLedger) -> None:
    for phase, cost in ledger.snapshot().items():
        rag_ledger_tokens.labels(phase=phase.value, direction="in").set(cost.tokens_in)
        rag_ledger_tokens.labels(phase=phase.value, direction="out").set(cost.tokens_out)
        rag_ledger_tokens.labels(phase=phase.value, direction="embed").set(cost.embed_tokens)
        rag_ledger_api_calls.labels(phase=phase.value).set(cost.api_calls)


def write_metrics_file(path: Path) -> None:
    """Dump the default registry in the Prometheus text exposition format."""
    write_to_textfile(str(path), REGISTRY)
