import argparse
from pathlib import Path

from app.config import RetrievalMode

from .constants import (
    CMD_EVAL,
    CMD_INDEX,
    CMD_QUERY,
    CMD_STATS,
    CMD_UPDATE,
    EVAL_ANSWERS,
    EVAL_JUDGE,
    EVAL_QUESTIONS,
    PROG,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=PROG,
        description="Graph-indexed retrieval-augmented generation with cost accounting.",
    )
    parser.add_argument(
        "--config",
        type=Path,
        help="TOML config file (defaults to $RAG_CONFIG, then built-in defaults)",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    index = commands.add_parser(CMD_INDEX, help="Index a corpus into the store")
    index.add_argument("path", type=Path, help="Corpus directory, manifest or file")

    update = commands.add_parser(CMD_UPDATE, help="Add documents to an existing store")
    update.add_argument("path", type=Path, help="Directory, manifest or file of new documents")

    query = commands.add_parser(CMD_QUERY, help="Answer a question from the store")
    query.add_argument("question")
    query.add_argument(
        "--mode",
        type=RetrievalMode,
        choices=list(RetrievalMode),
        help="Retrieval mode (default from config)",
    )
    query.add_argument(
        "--no-origin",
        action="store_true",
        help="Leave source chunks out of the context",
    )
    query.add_argument(
        "--trace",
        action="store_true",
        help="Print the JSON query trace instead of the bare answer",
    )

    evaluation = commands.add_parser(CMD_EVAL, help="Pairwise evaluation harness")
    steps = evaluation.add_subparsers(dest="step", required=True)

    questions = steps.add_parser(EVAL_QUESTIONS, help="Generate the question set")
    questions.add_argument("--description", required=True, help="What the corpus is about")
    questions.add_argument("--out", type=Path, required=True)

    answers = steps.add_parser(EVAL_ANSWERS, help="Answer every question with one mode")
    answers.add_argument("--questions", type=Path, required=True)
    answers.add_argument("--mode", type=RetrievalMode, choices=list(RetrievalMode))
    answers.add_argument("--no-origin", action="store_true")
    answers.add_argument("--out", type=Path, required=True)

    judge = steps.add_parser(EVAL_JUDGE, help="Judge two answer files against each other")
    judge.add_argument("--questions", type=Path, required=True)
    judge.add_argument("--answers1", type=Path, required=True)
    judge.add_argument("--answers2", type=Path, required=True)
    judge.add_argument("--name1", help="Label of the first system (default: its mode)")
    judge.add_argument("--name2", help="Label of the second system (default: its mode)")

    stats = commands.add_parser(CMD_STATS, help="Show store statistics and cumulative cost")
    stats.add_argument(
        "--metrics-file",
        type=Path,
        help="Also write Prometheus metrics in the text format to this path",
    )
    return parser
