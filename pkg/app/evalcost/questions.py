import logging
import re

from app.core.errors import RagError, RagErrorKind
from app.llm.base import LlmProvider
from app.llm.constants import PromptTask
from app.llm.prompts import question_generation_prompt, with_format_reminder
from app.model.ledger import Phase

from .constants import QUESTIONS_PER_TASK, TASKS_PER_USER, USERS
from .models import QuestionSet, TaskQuestions, UserTasks

logger = logging.getLogger(__name__)

_ITEM = re.compile(r"^\s*[-*]?\s*(User|Task|Question)\s+\d+\s*:\s*(.*\S)\s*$", re.IGNORECASE)


class StructureError(ValueError):
    """Generated questions do not have the requested shape.

    ``level`` names where it broke: ``users``, ``tasks`` or ``questions``.
    """

    def __init__(self, message: str, level: str):
        super().__init__(message)
        self.level = level


def parse_question_set(
    raw: str,
    description: str,
    users: int = USERS,
    tasks: int = TASKS_PER_USER,
    questions: int = QUESTIONS_PER_TASK,
) -> QuestionSet:
    """Read the indented User / Task / Question list.

    Lines that are not list items are ignored.

    Raises:
        StructureError: If any level has the wrong number of items, or an
            item appears before its parent
    """
    parsed = QuestionSet(description=description)
    for line in raw.splitlines():
        match = _ITEM.match(line)
        if match is None:
            continue
        level, text = match.group(1).lower(), match.group(2)
        if level == "user":
            parsed.users.append(UserTasks(description=text))
        elif level == "task":
            if not parsed.users:
                raise StructureError("task listed before any user", "tasks")
            parsed.users[-1].tasks.append(TaskQuestions(description=text))
        else:
            if not parsed.users or not parsed.users[-1].tasks:
                raise StructureError("question listed before any task", "questions")
            parsed.users[-1].tasks[-1].questions.append(text)

    if len(parsed.users) != users:
        raise StructureError(f"expected {users} users, got {len(parsed.users)}", "users")
    for u, user in enumerate(parsed.users, start=1):
        if len(user.tasks) != tasks:
            raise StructureError(
                f"expected {tasks} tasks for user {u}, got {len(user.tasks)}", "tasks"
            )
        for t, task in enumerate(user.tasks, start=1):
            if len(task.questions) != questions:
                raise StructureError(
                    f"expected {questions} questions for user {u} task {t}, "
                    f"got {len(task.questions)}",
                    "questions",
                )
    return parsed


async def _ask(provider: LlmProvider, prompt: str) -> str:
    try:
        return await provider.complete(
            prompt, phase=Phase.EVALUATE, task=PromptTask.QUESTION_GENERATION
        )
    except RagError as exc:
        if exc.kind != RagErrorKind.PROVIDER:
            raise
        raise exc.rewrap(RagErrorKind.QUESTION_GENERATION, "Question generation failed") from exc


async def generate_questions(
    description: str,
    provider: LlmProvider,
    users: int = USERS,
    tasks: int = TASKS_PER_USER,
    questions: int = QUESTIONS_PER_TASK,
) -> QuestionSet:
    """Have the provider invent personas, their tasks and corpus-wide questions.

    Args:
        description: What the corpus is about
        provider: Provider charged under the evaluate phase
        users: Personas to request
        tasks: Tasks per persona
        questions: Questions per (persona, task)

    Returns:
        A question set of exactly ``users * tasks * questions`` questions

    Raises:
        RagError: QUESTION_GENERATION on an empty description, a failed call,
            or a reply still malformed after one repair; ``details["level"]``
            names the deficient level
    """
    if not description.strip():
        raise RagError(
            message="Corpus description is empty", kind=RagErrorKind.QUESTION_GENERATION
        )

    prompt = question_generation_prompt(description, users, tasks, questions)
    raw = await _ask(provider, prompt)
    try:
        return parse_question_set(raw, description, users, tasks, questions)
    except StructureError as exc:
        logger.warning("Malformed question list (%s), asking again", exc)

    raw = await _ask(provider, with_format_reminder(prompt))
    try:
        question_set = parse_question_set(raw, description, users, tasks, questions)
    except StructureError as exc:
        raise RagError(
            message=f"Generated questions are malformed: {exc}",
            kind=RagErrorKind.QUESTION_GENERATION,
            details={"level": exc.level, "raw": raw},
        ) from exc
    logger.info("Generated %d questions", len(question_set.questions()))
    return question_set
