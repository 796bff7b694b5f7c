import json

import pytest

from app.config import JudgePolicy
from app.llm.mocks import ScriptedProvider
from app.llm.prompts import prompt_section
from app.llm.rule_based.client import RuleBasedProvider
from app.model.ledger import CostLedger, Phase

from .constants import DIMENSIONS, OVERALL
from .models import Question
from .winrates import render_win_rate_table, win_rates

FIRST_WINS = json.dumps(
    {
        name: {"Winner": "Answer 1", "Explanation": "first"}
        for name in (*DIMENSIONS, "Overall Winner")
    }
)


def make_questions(count: int) -> list[Question]:
    return [Question(id=f"q{i}", user=1, task=1, text=f"Question {i}?") for i in range(count)]


@pytest.mark.property
@pytest.mark.asyncio
async def test_position_bias_cancels_out_under_alternation():
    questions = make_questions(100)
    ledger = CostLedger()
    provider = RuleBasedProvider(ledger, judge_policy=JudgePolicy.POSITION_A)

    report = await win_rates(
        questions,
        [f"answer one {i}" for i in range(100)],
        [f"a much longer answer two {i}" for i in range(100)],
        provider,
    )

    assert report.judged_pairs == 200
    assert ledger[Phase.EVALUATE].api_calls == 200
    for rate in report.dimensions.values():
        assert (rate.wins_1, rate.wins_2) == (100, 100)
        assert (rate.rate_1, rate.rate_2) == (50.0, 50.0)


@pytest.mark.asyncio
async def test_longer_answer_judge_favours_the_longer_system():
    questions = make_questions(10)
    provider = RuleBasedProvider(CostLedger(), judge_policy=JudgePolicy.LONGER)

    report = await win_rates(
        questions,
        ["a detailed and rather long answer"] * 10,
        ["short"] * 10,
        provider,
        system_1="hybrid",
        system_2="naive",
    )

    assert report.system_1 == "hybrid"
    for rate in report.dimensions.values():
        assert (rate.rate_1, rate.rate_2) == (100.0, 0.0)


@pytest.mark.asyncio
async def test_skipped_pairs_leave_the_denominator():
    questions = make_questions(125)
    answers_1 = [f"one {i}" for i in range(125)]
    answers_2 = [f"two {i}" for i in range(125)]

    def respond(prompt: str) -> str:
        question = prompt_section(prompt, "Question")
        first = prompt_section(prompt, "Answer 1")
        if question == "Question 0?" or (question == "Question 1?" and first == "one 1"):
            return "no verdict"
        return FIRST_WINS

    provider = ScriptedProvider(CostLedger(), respond)

    report = await win_rates(questions, answers_1, answers_2, provider)

    assert report.skipped_pairs == 3
    assert report.judged_pairs == 247
    for rate in report.dimensions.values():
        assert rate.judged == 247
        assert rate.wins_1 + rate.wins_2 == 247
        assert rate.rate_1 + rate.rate_2 == pytest.approx(100.0)


@pytest.mark.asyncio
async def test_empty_answer_is_skipped_not_awarded():
    report = await win_rates(
        make_questions(1),
        [""],
        ["something"],
        RuleBasedProvider(CostLedger(), judge_policy=JudgePolicy.POSITION_A),
    )

    assert report.skipped_pairs == 2
    assert report.judged_pairs == 0
    assert report.dimensions[OVERALL].rate_1 == 0.0


@pytest.mark.asyncio
async def test_misaligned_answers_are_rejected():
    with pytest.raises(ValueError):
        await win_rates(make_questions(2), ["a"], ["b", "c"], RuleBasedProvider(CostLedger()))


@pytest.mark.asyncio
async def test_table_lists_every_dimension():
    report = await win_rates(
        make_questions(2),
        ["a", "b"],
        ["c", "d"],
        RuleBasedProvider(CostLedger(), judge_policy=JudgePolicy.POSITION_B),
    )

    table = render_win_rate_table(report)

    for name in (*DIMENSIONS, OVERALL):
        assert name in table
    assert "50.0%" in table
    assert "judged pairs: 4, skipped: 0" in table


@pytest.mark.asyncio
async def test_oversized_judge_prompt_skips_the_pair():
    ledger = CostLedger(c_max=1000)
    provider = RuleBasedProvider(ledger, judge_policy=JudgePolicy.POSITION_A)
    rambling = "and then the harbour flooded again " * 300

    report = await win_rates(
        make_questions(3), ["brief", rambling, "brief"], ["terse"] * 3, provider
    )

    assert report.skipped_pairs == 2
    assert report.judged_pairs == 4
    assert ledger[Phase.EVALUATE].api_calls == 4
