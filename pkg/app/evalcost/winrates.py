import asyncio
import logging
from collections.abc import Sequence

from app.core.errors import RagError, RagErrorKind
from app.llm.base import LlmProvider

from .constants import DIMENSIONS, OVERALL, SYSTEM_1, SYSTEM_2
from .judge import judge_pair
from .models import DimensionRate, JudgeVerdict, Question, WinRateReport

logger = logging.getLogger(__name__)

# Failures that cost one pair its verdict without stopping the run
SKIPPABLE = frozenset({RagErrorKind.JUDGE, RagErrorKind.PROMPT_TOO_LARGE})


async def _judge_or_skip(
    question: Question,
    first: tuple[str, str],
    second: tuple[str, str],
    provider: LlmProvider,
) -> JudgeVerdict | None:
    (first_system, first_answer), (second_system, second_answer) = first, second
    try:
        return await judge_pair(
            question.text,
            first_answer,
            second_answer,
            provider,
            first_system=first_system,
            second_system=second_system,
        )
    except RagError as exc:
        if exc.kind not in SKIPPABLE:
            raise
        logger.warning(
            "Skipping %s with %s first: %s", question.id, first_system, exc.message
        )
        return None


def tally(
    verdicts: Sequence[JudgeVerdict | None],
    system_1: str = SYSTEM_1,
    system_2: str = SYSTEM_2,
) -> WinRateReport:
    """Count wins per dimension; skipped pairs stay out of every denominator."""
    report = WinRateReport(
        system_1=system_1,
        system_2=system_2,
        dimensions={name: DimensionRate() for name in (*DIMENSIONS, OVERALL)},
    )
    for verdict in verdicts:
        if verdict is None:
            report.skipped_pairs += 1
            continue
        report.judged_pairs += 1
        outcomes = {**verdict.dimensions, OVERALL: verdict.overall}
        for name, outcome in outcomes.items():
            rate = report.dimensions[name]
            if verdict.winning_system(outcome) == system_1:
                rate.wins_1 += 1
            else:
                rate.wins_2 += 1
    return report


async def win_rates(
    questions: Sequence[Question],
    answers_1: Sequence[str],
    answers_2: Sequence[str],
    provider: LlmProvider,
    *,
    system_1: str = SYSTEM_1,
    system_2: str = SYSTEM_2,
) -> WinRateReport:
    """Judge every question twice, once in each answer order.

    Pairs run concurrently under the provider's in-flight bound and are
    tallied in question order.

    Raises:
        ValueError: If the answer lists are not aligned with the questions
    """
    if not len(questions) == len(answers_1) == len(answers_2):
        raise ValueError(
            f"Got {len(questions)} questions but {len(answers_1)} and "
            f"{len(answers_2)} answers"
        )

    jobs = []
    for question, answer_1, answer_2 in zip(questions, answers_1, answers_2, strict=True):
        one, two = (system_1, answer_1), (system_2, answer_2)
        jobs.append(_judge_or_skip(question, one, two, provider))
        jobs.append(_judge_or_skip(question, two, one, provider))
    verdicts = await asyncio.gather(*jobs)

    report = tally(verdicts, system_1, system_2)
    logger.info(
        "Judged %d pairs (%d skipped); overall %s %.1f%% vs %s %.1f%%",
        report.judged_pairs,
        report.skipped_pairs,
        system_1,
        report.dimensions[OVERALL].rate_1,
        system_2,
        report.dimensions[OVERALL].rate_2,
    )
    return report


def render_win_rate_table(report: WinRateReport) -> str:
    width = max(len(name) for name in report.dimensions) if report.dimensions else 0
    lines = [
        f"{'':<{width}}  {report.system_1:>12}  {report.system_2:>12}",
        *(
            f"{name:<{width}}  {rate.rate_1:>11.1f}%  {rate.rate_2:>11.1f}%"
            for name, rate in report.dimensions.items()
        ),
        f"judged pairs: {report.judged_pairs}, skipped: {report.skipped_pairs}",
    ]
    return "\n".join(lines)
