from enum import StrEnum

from pydantic import BaseModel, Field, computed_field, model_validator

from app.config import RetrievalMode
from app.model.ledger import Phase, PhaseCost

from .constants import DIMENSIONS


class Position(StrEnum):
    """Slot an answer occupies in the judge prompt."""

    FIRST = "Answer 1"
    SECOND = "Answer 2"


class Question(BaseModel):
    id: str
    user: int = Field(ge=1)
    task: int = Field(ge=1)
    text: str = Field(min_length=1)


class TaskQuestions(BaseModel):
    description: str
    questions: list[str] = Field(default_factory=list)


class UserTasks(BaseModel):
    description: str
    tasks: list[TaskQuestions] = Field(default_factory=list)


class QuestionSet(BaseModel):
    """Personas, their tasks and the corpus-wide questions each task raises."""

    description: str
    users: list[UserTasks] = Field(default_factory=list)

    def questions(self) -> list[Question]:
        return [
            Question(id=f"u{u}-t{t}-q{q}", user=u, task=t, text=text)
            for u, user in enumerate(self.users, start=1)
            for t, task in enumerate(user.tasks, start=1)
            for q, text in enumerate(task.questions, start=1)
        ]


class AnswerRecord(BaseModel):
    """One line of an answers file, aligned with the question set by id."""

    question_id: str
    question: str
    answer: str
    mode: RetrievalMode
    cost: dict[Phase, PhaseCost] = Field(default_factory=dict)


class DimensionVerdict(BaseModel):
    winner: Position
    explanation: str = ""


class JudgeVerdict(BaseModel):
    dimensions: dict[str, DimensionVerdict]
    overall: DimensionVerdict
    # system whose answer sat in the first slot
    first_system: str
    second_system: str

    @model_validator(mode="after")
    def check_dimensions(self) -> "JudgeVerdict":
        missing = [d for d in DIMENSIONS if d not in self.dimensions]
        if missing:
            raise ValueError(f"verdict lacks dimensions {missing}")
        return self

    def winning_system(self, verdict: DimensionVerdict) -> str:
        return self.first_system if verdict.winner == Position.FIRST else self.second_system


class DimensionRate(BaseModel):
    wins_1: int = 0
    wins_2: int = 0

    @computed_field
    @property
    def judged(self) -> int:
        return self.wins_1 + self.wins_2

    @computed_field
    @property
    def rate_1(self) -> float:
        return 100.0 * self.wins_1 / self.judged if self.judged else 0.0

    @computed_field
    @property
    def rate_2(self) -> float:
        return 100.0 * self.wins_2 / self.judged if self.judged else 0.0


class WinRateReport(BaseModel):
    system_1: str
    system_2: str
    judged_pairs: int = 0
    skipped_pairs: int = 0
    dimensions: dict[str, DimensionRate] = Field(default_factory=dict)


class RebuildComparison(BaseModel):
    """Measured incremental extraction calls against a from-scratch rebuild."""

    update_chunks: int
    total_chunks: int
    gleaning: int
    update_extraction_calls: int
    rebuild_extraction_calls: int
    reference_communities: int
    reference_tokens_per_report: int

    @computed_field
    @property
    def call_ratio(self) -> float:
        if not self.rebuild_extraction_calls:
            return 0.0
        return self.update_extraction_calls / self.rebuild_extraction_calls

    @computed_field
    @property
    def reference_rebuild_tokens(self) -> int:
        # every community report is regenerated once for removal and once for insertion
        return self.reference_communities * 2 * self.reference_tokens_per_report


class CostReport(BaseModel):
    phases: dict[Phase, PhaseCost]
    c_max: int
    extraction_tokens: int
    extraction_calls: int
    profiling_calls: int
    retrieval_calls: int
    retrieval_prompt_tokens: int
    embedding_tokens: int
    comparison: RebuildComparison | None = None
