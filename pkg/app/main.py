import argparse
import asyncio
import logging
import sys
from collections.abc import Coroutine, Sequence
from typing import Any

import sentry_sdk

from app.cli import commands
from app.cli import constants as cli
from app.cli.parser import build_parser
from app.cli.runtime import Runtime
from app.config import load_settings
from app.core.errors import ExitCode, RagError
from app.core.logging import configure_logging, redact_secrets

logger = logging.getLogger(__name__)


def _command(runtime: Runtime, args: argparse.Namespace) -> Coroutine[Any, Any, ExitCode]:
    match (args.command, getattr(args, "step", None)):
        case (cli.CMD_INDEX, _):
            return commands.cmd_index(runtime, args.path)
        case (cli.CMD_UPDATE, _):
            return commands.cmd_update(runtime, args.path)
        case (cli.CMD_QUERY, _):
            return commands.cmd_query(
                runtime, args.question, args.mode, args.no_origin, args.trace
            )
        case (cli.CMD_STATS, _):
            return commands.cmd_stats(runtime, args.metrics_file)
        case (cli.CMD_EVAL, cli.EVAL_QUESTIONS):
            return commands.cmd_eval_questions(runtime, args.description, args.out)
        case (cli.CMD_EVAL, cli.EVAL_ANSWERS):
            return commands.cmd_eval_answers(
                runtime, args.questions, args.out, args.mode, args.no_origin
            )
        case (cli.CMD_EVAL, cli.EVAL_JUDGE):
            return commands.cmd_eval_judge(
                runtime, args.questions, args.answers1, args.answers2, args.name1, args.name2
            )
        case _:
            raise ValueError(f"Unknown command: {args.command}")


def _fail(error: RagError) -> int:
    print(f"{cli.PROG}: [{error.kind.value}] {redact_secrets(error.message)}", file=sys.stderr)
    return error.exit_code


def main(argv: Sequence[str] | None = None) -> int:
    """Run one command and return its process exit code.

    Configuration is validated before any command starts; every failure
    surfaces as a phase-tagged message on stderr and the exit code of the
    failing phase.
    """
    args = build_parser().parse_args(argv)
    try:
        settings = load_settings(args.config)
    except RagError as exc:
        return _fail(exc)

    configure_logging(settings.LOG_LEVEL)
    if settings.SENTRY_DSN:
        sentry_sdk.init(dsn=settings.SENTRY_DSN, environment=settings.ENVIRONMENT)

    runtime = Runtime(settings)
    try:
        return asyncio.run(_command(runtime, args))
    except RagError as exc:
        logger.debug("Command failed", exc_info=True)
        return _fail(exc)
    finally:
        runtime.record_costs()
