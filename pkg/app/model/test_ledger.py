import asyncio

import pytest

from app.model.ledger import CostLedger, Phase, PhaseCost


def test_fresh_ledger_is_all_zero():
    ledger = CostLedger()
    assert all(cost == PhaseCost() for cost in ledger.snapshot().values())
    assert ledger.total_api_calls == 0


def test_record_call_increments_exactly_one_call():
    ledger = CostLedger()

    ledger.record_call(Phase.INDEX, tokens_in=120, tokens_out=30)
    ledger.record_call(Phase.INDEX, tokens_in=80, tokens_out=10)

    assert ledger[Phase.INDEX] == PhaseCost(tokens_in=200, tokens_out=40, api_calls=2)
    assert ledger[Phase.RETRIEVE] == PhaseCost()


def test_embedding_tokens_do_not_count_as_calls():
    ledger = CostLedger()
    ledger.record_embedding(Phase.RETRIEVE, 12)

    assert ledger[Phase.RETRIEVE].api_calls == 0
    assert ledger[Phase.RETRIEVE].embed_tokens == 12


def test_negative_counts_are_rejected():
    ledger = CostLedger()
    with pytest.raises(ValueError):
        ledger.record_call(Phase.INDEX, tokens_in=-1, tokens_out=0)
    with pytest.raises(ValueError):
        ledger.record_embedding(Phase.INDEX, -5)


def test_since_reports_growth_per_phase():
    ledger = CostLedger()
    ledger.record_call(Phase.INDEX, 10, 1)
    before = ledger.snapshot()

    ledger.record_call(Phase.RETRIEVE, 40, 8)
    delta = ledger.since(before)

    assert delta[Phase.RETRIEVE] == PhaseCost(tokens_in=40, tokens_out=8, api_calls=1)
    assert delta[Phase.INDEX] == PhaseCost()


def test_absorb_adds_counters():
    history = CostLedger()
    history.record_call(Phase.INDEX, 5, 5)
    run = CostLedger()
    run.record_call(Phase.INDEX, 1, 2)
    run.record_call(Phase.GENERATE, 3, 4)

    history.absorb(run)

    assert history[Phase.INDEX] == PhaseCost(tokens_in=6, tokens_out=7, api_calls=2)
    assert history[Phase.GENERATE].api_calls == 1


def test_ledger_json_round_trip():
    ledger = CostLedger(c_max=4096)
    ledger.record_call(Phase.UPDATE, 7, 3)

    restored = CostLedger.model_validate_json(ledger.model_dump_json())

    assert restored.c_max == 4096
    assert restored.snapshot() == ledger.snapshot()


def test_scoped_child_sees_only_calls_inside_the_scope():
    ledger = CostLedger(c_max=2048)
    ledger.record_call(Phase.INDEX, 10, 1)

    with ledger.scoped() as spent:
        ledger.record_call(Phase.RETRIEVE, 40, 8)
        ledger.record_embedding(Phase.RETRIEVE, 6)
    ledger.record_call(Phase.GENERATE, 5, 5)

    assert spent.c_max == 2048
    assert spent[Phase.RETRIEVE] == PhaseCost(
        tokens_in=40, tokens_out=8, api_calls=1, embed_tokens=6
    )
    assert spent.total_api_calls == 1
    assert ledger.total_api_calls == 3


def test_scope_ignores_charges_to_other_ledgers():
    ledger, other = CostLedger(), CostLedger()

    with ledger.scoped() as spent:
        other.record_call(Phase.GENERATE, 9, 9)

    assert spent.total_api_calls == 0


@pytest.mark.asyncio
async def test_concurrent_scopes_do_not_share_cost():
    ledger = CostLedger()

    async def job(calls: int) -> CostLedger:
        with ledger.scoped() as spent:
            for _ in range(calls):
                await asyncio.sleep(0)
                ledger.record_call(Phase.GENERATE, 10, 1)
        return spent

    children = await asyncio.gather(*(job(calls) for calls in (1, 2, 3, 4)))

    assert [child[Phase.GENERATE].api_calls for child in children] == [1, 2, 3, 4]
    assert ledger[Phase.GENERATE].api_calls == 10
