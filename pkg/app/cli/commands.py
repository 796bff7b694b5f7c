import asyncio
import json
import logging
from pathlib import Path
from typing import Any

from pydantic import BaseModel, ValidationError

from app.config import RetrievalMode, Settings
from app.core import metrics
from app.core.errors import ExitCode, RagError, RagErrorKind
from app.evalcost.constants import SYSTEM_1, SYSTEM_2
from app.evalcost.cost import cost_report, rebuild_comparison, render_cost_table
from app.evalcost.models import AnswerRecord, QuestionSet
from app.evalcost.questions import generate_questions
from app.evalcost.winrates import render_win_rate_table, win_rates
from app.graph.indexer import index_documents
from app.graph.storage import json_lines, save, write_atomic
from app.ingest.corpus import load_corpus
from app.model.ledger import Phase
from app.query.engine import QueryEngine
from app.query.models import QueryMode
from app.vectors.index import build_index

from .runtime import Runtime

logger = logging.getLogger(__name__)


def _emit(payload: dict[str, Any]) -> None:
    print(json.dumps(_jsonable(payload), indent=2, sort_keys=True))


def _jsonable(value: Any) -> Any:
    if isinstance(value, BaseModel):
        return value.model_dump(mode="json")
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    return value


def query_mode(settings: Settings, mode: RetrievalMode | None, no_origin: bool) -> QueryMode:
    return QueryMode(
        mode=mode or settings.retrieval.mode,
        include_origin_text=settings.retrieval.include_origin_text and not no_origin,
    )


def _read_model[M: BaseModel](path: Path, model: type[M]) -> M:
    try:
        return model.model_validate_json(path.read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError, ValidationError) as exc:
        raise RagError(
            message=f"Cannot read {model.__name__} from {path}: {exc}",
            kind=RagErrorKind.STORAGE,
            details={"path": str(path)},
        ) from exc


def read_answers(path: Path) -> dict[str, AnswerRecord]:
    try:
        lines = json_lines(path.read_text(encoding="utf-8"))
        records = [AnswerRecord.model_validate_json(line) for line in lines]
    except (OSError, UnicodeDecodeError, ValidationError) as exc:
        raise RagError(
            message=f"Cannot read answers from {path}: {exc}",
            kind=RagErrorKind.STORAGE,
            details={"path": str(path)},
        ) from exc
    return {record.question_id: record for record in records}


async def cmd_index(runtime: Runtime, path: Path) -> ExitCode:
    """Index a corpus, continuing from the stored version when there is one."""
    store = runtime.load_store_or_empty()
    documents = load_corpus(path)
    store, report = await index_documents(
        store, documents, runtime.provider, runtime.settings, phase=Phase.INDEX
    )
    # warms the embedding cache for later queries
    await build_index(store, runtime.embedder, phase=Phase.INDEX)
    save(store, runtime.settings.storage.path)

    costs = cost_report(runtime.ledger)
    _emit({"index": report, "graph": store.stats(), "cost": costs})
    print(render_cost_table(costs))
    return ExitCode.OK


async def cmd_update(runtime: Runtime, path: Path) -> ExitCode:
    """Merge new documents into an existing store.

    Raises:
        RagError: MISSING_STORE when nothing has been indexed yet
    """
    store = runtime.load_store()
    documents = load_corpus(path)
    store, report = await index_documents(
        store, documents, runtime.provider, runtime.settings, phase=Phase.UPDATE
    )
    await build_index(store, runtime.embedder, phase=Phase.UPDATE)
    save(store, runtime.settings.storage.path)

    comparison = rebuild_comparison(
        update_extraction_calls=runtime.ledger[Phase.UPDATE].api_calls,
        update_chunks=report.chunks_extracted,
        total_chunks=len(store.chunks),
        gleaning=runtime.settings.extraction.gleaning,
        settings=runtime.settings.evaluation,
    )
    costs = cost_report(runtime.ledger, comparison)
    _emit({"update": report, "graph": store.stats(), "cost": costs})
    print(render_cost_table(costs))
    return ExitCode.OK


async def cmd_query(
    runtime: Runtime,
    question: str,
    mode: RetrievalMode | None = None,
    no_origin: bool = False,
    trace: bool = False,
) -> ExitCode:
    engine = await QueryEngine.open(
        runtime.load_store(),
        runtime.provider,
        runtime.embedder,
        runtime.settings.retrieval,
        runtime.counter,
    )
    result = await engine.query(question, query_mode(runtime.settings, mode, no_origin))
    print(result.model_dump_json(indent=2) if trace else result.answer)
    return ExitCode.OK


async def cmd_eval_questions(runtime: Runtime, description: str, out: Path) -> ExitCode:
    question_set = await generate_questions(description, runtime.judge_provider)
    write_atomic(out, question_set.model_dump_json(indent=2) + "\n")
    _emit({"questions": len(question_set.questions()), "out": str(out)})
    return ExitCode.OK


async def cmd_eval_answers(
    runtime: Runtime,
    questions_path: Path,
    out: Path,
    mode: RetrievalMode | None = None,
    no_origin: bool = False,
) -> ExitCode:
    """Answer the whole question set and write one JSON line per question."""
    questions = _read_model(questions_path, QuestionSet).questions()
    engine = await QueryEngine.open(
        runtime.load_store(),
        runtime.provider,
        runtime.embedder,
        runtime.settings.retrieval,
        runtime.counter,
    )
    selected = query_mode(runtime.settings, mode, no_origin)
    traces = await asyncio.gather(*(engine.query(q.text, selected) for q in questions))
    records = [
        AnswerRecord(
            question_id=question.id,
            question=question.text,
            answer=trace.answer,
            mode=trace.mode,
            cost=trace.cost,
        )
        for question, trace in zip(questions, traces, strict=True)
    ]
    write_atomic(out, "".join(record.model_dump_json() + "\n" for record in records))
    _emit({"answers": len(records), "mode": selected.mode.value, "out": str(out)})
    return ExitCode.OK


async def cmd_eval_judge(
    runtime: Runtime,
    questions_path: Path,
    answers1: Path,
    answers2: Path,
    name1: str | None = None,
    name2: str | None = None,
) -> ExitCode:
    """Judge two answer files with alternated order and report win rates.

    Raises:
        RagError: JUDGE when an answer file misses a question or both systems
            carry the same label
    """
    questions = _read_model(questions_path, QuestionSet).questions()
    first, second = read_answers(answers1), read_answers(answers2)
    missing = [q.id for q in questions if q.id not in first or q.id not in second]
    if missing:
        raise RagError(
            message=f"Answer files lack {len(missing)} questions, e.g. {missing[0]}",
            kind=RagErrorKind.JUDGE,
            details={"missing": missing},
        )

    if name1 is None and name2 is None and questions:
        name1 = first[questions[0].id].mode.value
        name2 = second[questions[0].id].mode.value
        if name1 == name2:
            name1, name2 = SYSTEM_1, SYSTEM_2
    name1, name2 = name1 or SYSTEM_1, name2 or SYSTEM_2
    if name1 == name2:
        raise RagError(message=f"Both systems are labelled {name1!r}", kind=RagErrorKind.JUDGE)

    report = await win_rates(
        questions,
        [first[q.id].answer for q in questions],
        [second[q.id].answer for q in questions],
        runtime.judge_provider,
        system_1=name1,
        system_2=name2,
    )
    _emit({"win_rates": report})
    print(render_win_rate_table(report))
    return ExitCode.OK


async def cmd_stats(runtime: Runtime, metrics_file: Path | None = None) -> ExitCode:
    """Print store statistics and the cumulative cost of every recorded run."""
    store = runtime.load_store_or_empty()
    history = runtime.history()
    costs = cost_report(history)
    _emit(
        {
            "graph": store.stats(),
            "consistency_errors": store.consistency_errors(),
            "cost": costs,
        }
    )
    print(render_cost_table(costs))
    if metrics_file is not None:
        metrics.export_ledger(history)
        metrics.write_metrics_file(metrics_file)
        logger.info("Wrote metrics to %s", metrics_file)
    return ExitCode.OK
