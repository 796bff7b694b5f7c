from app.config import EvaluationSettings
from app.model.ledger import CostLedger, Phase

from .models import CostReport, RebuildComparison

_EXTRACTION_PHASES = (Phase.INDEX, Phase.UPDATE)


def cost_report(
    ledger: CostLedger,
    comparison: RebuildComparison | None = None,
) -> CostReport:
    """Per-phase ledger figures plus the derived extraction and retrieval costs."""
    phases = ledger.snapshot()
    return CostReport(
        phases=phases,
        c_max=ledger.c_max,
        extraction_tokens=sum(
            phases[p].tokens_in + phases[p].tokens_out for p in _EXTRACTION_PHASES
        ),
        extraction_calls=sum(phases[p].api_calls for p in _EXTRACTION_PHASES),
        profiling_calls=phases[Phase.PROFILE].api_calls,
        retrieval_calls=phases[Phase.RETRIEVE].api_calls,
        retrieval_prompt_tokens=phases[Phase.RETRIEVE].tokens_in,
        embedding_tokens=sum(cost.embed_tokens for cost in phases.values()),
        comparison=comparison,
    )


def rebuild_comparison(
    update_extraction_calls: int,
    update_chunks: int,
    total_chunks: int,
    gleaning: int,
    settings: EvaluationSettings | None = None,
) -> RebuildComparison:
    """Compare an incremental update with re-extracting every chunk.

    The community-rebuild side is the reference formula from configuration,
    not a simulation.
    """
    settings = settings or EvaluationSettings()
    return RebuildComparison(
        update_chunks=update_chunks,
        total_chunks=total_chunks,
        gleaning=gleaning,
        update_extraction_calls=update_extraction_calls,
        rebuild_extraction_calls=total_chunks * (1 + gleaning),
        reference_communities=settings.reference_communities,
        reference_tokens_per_report=settings.reference_tokens_per_report,
    )


def render_cost_table(report: CostReport) -> str:
    lines = [f"{'phase':<10} {'tokens_in':>10} {'tokens_out':>10} {'calls':>6} {'embed':>8}"]
    for phase, cost in report.phases.items():
        lines.append(
            f"{phase.value:<10} {cost.tokens_in:>10} {cost.tokens_out:>10} "
            f"{cost.api_calls:>6} {cost.embed_tokens:>8}"
        )
    lines += [
        f"c_max: {report.c_max}",
        f"extraction: {report.extraction_calls} calls, {report.extraction_tokens} tokens",
        f"profiling: {report.profiling_calls} calls",
        f"retrieval: {report.retrieval_calls} calls, "
        f"{report.retrieval_prompt_tokens} prompt tokens",
    ]
    if comparison := report.comparison:
        lines += [
            f"update: {comparison.update_extraction_calls} extraction calls for "
            f"{comparison.update_chunks} new chunks",
            f"full rebuild: {comparison.rebuild_extraction_calls} extraction calls for "
            f"{comparison.total_chunks} chunks (ratio {comparison.call_ratio:.3f})",
            f"community rebuild reference: {comparison.reference_communities} x 2 x "
            f"{comparison.reference_tokens_per_report} = "
            f"{comparison.reference_rebuild_tokens} tokens",
        ]
    return "\n".join(lines)
