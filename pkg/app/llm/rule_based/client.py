import json
import re
from collections.abc import Mapping

from app.config import JudgePolicy
from app.core.errors import RagError, RagErrorKind
from app.ingest.tokens import TokenCounter
from app.llm.base import Completion, LlmProvider
from app.llm.constants import (
    COMPLETION_DELIMITER,
    ENTITY_TAG,
    RECORD_DELIMITER,
    RELATION_TAG,
    TUPLE_DELIMITER,
    PromptTask,
)
from app.llm.prompts import prompt_section, prompt_task
from app.model.constants import UNKNOWN_ENTITY_TYPE
from app.model.ledger import CostLedger
from app.model.models import EntityId, RelationId, normalize_entity_name

from .constants import (
    ANSWER_PREVIEW_LINES,
    FALLBACK_RELATION_KEY,
    MAX_PROFILE_KEYS,
    MAX_RELATION_KEYWORDS,
    PERSONAS,
)
from .utils import (
    capitalized_phrases,
    classify_entity,
    keyword_runs,
    mentions_by_sentence,
    quoted_phrases,
    top_words,
    words,
)

_SEP = re.escape(TUPLE_DELIMITER)
_PREVIOUS_ENTITY = re.compile(rf'\("{ENTITY_TAG}"{_SEP}(.*?){_SEP}')
_PREVIOUS_RELATION = re.compile(rf'\("{RELATION_TAG}"{_SEP}(.*?){_SEP}(.*?){_SEP}')
_CONTEXT_HEADER = re.compile(r"^-----([A-Z]+)-----$", re.MULTILINE)
_COUNT = {
    "users": re.compile(r"identify (\d+) potential users"),
    "tasks": re.compile(r"list (\d+) tasks"),
    "questions": re.compile(r"write (\d+) questions"),
}
_JUDGE_DIMENSIONS = ("Comprehensiveness", "Diversity", "Empowerment", "Overall Winner")


def _clean(field: str) -> str:
    for marker in (TUPLE_DELIMITER, RECORD_DELIMITER, COMPLETION_DELIMITER):
        field = field.replace(marker, " ")
    return " ".join(field.split())


def _safe_key(name: str) -> EntityId | None:
    try:
        return normalize_entity_name(name)
    except RagError:
        return None


class RuleBasedProvider(LlmProvider):
    """Deterministic offline provider.

    Every response is a pure function of the prompt (and the constructor
    arguments), so whole pipelines can be replayed byte for byte.
    """

    def __init__(
        self,
        ledger: CostLedger,
        counter: TokenCounter | None = None,
        max_in_flight: int = 8,
        per_pass_limit: int = 6,
        judge_policy: JudgePolicy = JudgePolicy.LONGER,
        overrides: Mapping[str, str] | None = None,
    ):
        super().__init__(ledger, counter, max_in_flight)
        self.per_pass_limit = per_pass_limit
        self.judge_policy = judge_policy
        # chunk text -> scripted raw extraction output
        self.overrides = dict(overrides or {})

    @property
    def provider_id(self) -> str:
        return "mock"

    async def _complete(self, prompt: str, max_tokens: int | None) -> Completion:
        text = self.respond(prompt)
        return Completion(
            text=text,
            tokens_in=self.counter.count(prompt),
            tokens_out=self.counter.count(text),
        )

    def respond(self, prompt: str) -> str:
        task = prompt_task(prompt)
        match task:
            case PromptTask.ENTITY_EXTRACTION:
                return self._extract(prompt, previous="")
            case PromptTask.GLEANING:
                previous = prompt_section(prompt, "Previous Output") or ""
                return self._extract(prompt, previous=previous)
            case PromptTask.ENTITY_PROFILE:
                return self._profile_entity(prompt)
            case PromptTask.RELATION_PROFILE:
                return self._profile_relation(prompt)
            case PromptTask.SUMMARIZE:
                return self._summarize(prompt)
            case PromptTask.KEYWORD_EXTRACTION:
                return self._keywords(prompt)
            case PromptTask.GRAPH_ANSWER | PromptTask.NAIVE_ANSWER:
                return self._answer(prompt)
            case PromptTask.QUESTION_GENERATION:
                return self._questions(prompt)
            case PromptTask.JUDGE:
                return self._judge(prompt)
            case _:
                raise RagError(
                    message="Rule-based provider got a prompt without a known task header",
                    kind=RagErrorKind.PROVIDER,
                )

    # ------------------------------------------------------------------
    # Extraction
    # ------------------------------------------------------------------

    def _extract(self, prompt: str, previous: str) -> str:
        text = prompt_section(prompt, "Text") or ""
        if text in self.overrides:
            return COMPLETION_DELIMITER if previous else self.overrides[text]

        types_section = prompt_section(prompt, "Entity Types") or ""
        entity_types = [t.strip() for t in types_section.split(",") if t.strip()]
        known_entities = {
            key for name in _PREVIOUS_ENTITY.findall(previous) if (key := _safe_key(name))
        }
        known_relations: set[RelationId] = set()
        for source, target in _PREVIOUS_RELATION.findall(previous):
            a, b = _safe_key(source), _safe_key(target)
            if a and b and a != b:
                known_relations.add(RelationId.of(a, b))

        entities: dict[EntityId, str] = {}
        relations: dict[RelationId, str] = {}
        for sentence, phrases in mentions_by_sentence(text):
            for phrase in phrases:
                key = normalize_entity_name(phrase)
                if key in entities or key in known_entities:
                    continue
                if len(entities) < self.per_pass_limit:
                    entity_type = classify_entity(phrase, sentence)
                    if entity_types and entity_type not in entity_types:
                        entity_type = UNKNOWN_ENTITY_TYPE
                    entities[key] = self._entity_record(phrase, entity_type, sentence)

        available = known_entities | entities.keys()
        for sentence, phrases in mentions_by_sentence(text):
            for i, source in enumerate(phrases):
                for target in phrases[i + 1 :]:
                    a, b = normalize_entity_name(source), normalize_entity_name(target)
                    rid = RelationId.of(a, b)
                    if rid in relations or rid in known_relations:
                        continue
                    if len(relations) >= self.per_pass_limit:
                        continue
                    if a in available and b in available:
                        relations[rid] = self._relation_record(source, target, sentence)

        records = [*entities.values(), *relations.values()]
        if not records:
            return COMPLETION_DELIMITER
        return f"{RECORD_DELIMITER}\n".join(records) + f"\n{COMPLETION_DELIMITER}"

    @staticmethod
    def _entity_record(name: str, entity_type: str, description: str) -> str:
        fields = (f'"{ENTITY_TAG}"', name, entity_type, _clean(description))
        return "(" + TUPLE_DELIMITER.join(fields) + ")"

    @staticmethod
    def _relation_record(source: str, target: str, sentence: str) -> str:
        exclude = set(words(source)) | set(words(target))
        keywords = ", ".join(top_words(sentence, MAX_RELATION_KEYWORDS, exclude))
        description = _clean(sentence)
        fields = (f'"{RELATION_TAG}"', source, target, description, keywords, "1.0")
        return "(" + TUPLE_DELIMITER.join(fields) + ")"

    # ------------------------------------------------------------------
    # Profiling
    # ------------------------------------------------------------------

    def _profile_entity(self, prompt: str) -> str:
        name = prompt_section(prompt, "Entity") or ""
        entity_type = prompt_section(prompt, "Type") or UNKNOWN_ENTITY_TYPE
        descriptions = (prompt_section(prompt, "Descriptions") or "").splitlines()
        body = " ".join(d.strip() for d in descriptions if d.strip())
        return f"{name} ({entity_type}): {body}"

    def _profile_relation(self, prompt: str) -> str:
        source = prompt_section(prompt, "Source") or ""
        target = prompt_section(prompt, "Target") or ""
        descriptions = " ".join((prompt_section(prompt, "Descriptions") or "").split())
        exclude = set(words(source)) | set(words(target))
        keys = top_words(descriptions, MAX_PROFILE_KEYS, exclude)
        keys = keys or [FALLBACK_RELATION_KEY]
        value = f"{source} and {target}: {descriptions}"
        return json.dumps({"keys": keys, "value": value})

    def _summarize(self, prompt: str) -> str:
        limit = int(prompt_section(prompt, "Limit") or "1")
        description = (prompt_section(prompt, "Description") or "").split()
        return " ".join(description[:limit])

    # ------------------------------------------------------------------
    # Query side
    # ------------------------------------------------------------------

    def _keywords(self, prompt: str) -> str:
        query = prompt_section(prompt, "Query") or ""
        quoted = quoted_phrases(query)
        unquoted = query
        for phrase in quoted:
            unquoted = unquoted.replace(phrase, " ")

        low: list[str] = []
        for phrase in [*quoted, *capitalized_phrases(unquoted)]:
            if phrase.casefold() not in {p.casefold() for p in low}:
                low.append(phrase)
        exclude = {w for phrase in low for w in words(phrase)}
        high = list(dict.fromkeys(keyword_runs(unquoted, exclude)))
        return json.dumps({"high_level_keywords": high, "low_level_keywords": low})

    def _answer(self, prompt: str) -> str:
        question = " ".join((prompt_section(prompt, "Question") or "").split())
        context = prompt_section(prompt, "Context") or ""
        headers = _CONTEXT_HEADER.findall(context)
        items = [
            line.strip()
            for line in context.splitlines()
            if line.strip() and not _CONTEXT_HEADER.match(line.strip())
        ]
        lines = [f"Answer to: {question}", f"Sections: {', '.join(headers) or 'none'}"]
        lines.extend(f"- {item}" for item in items[:ANSWER_PREVIEW_LINES])
        return "\n".join(lines)

    # ------------------------------------------------------------------
    # Evaluation
    # ------------------------------------------------------------------

    def _questions(self, prompt: str) -> str:
        counts = {
            name: int(m.group(1)) if (m := rx.search(prompt)) else 5
            for name, rx in _COUNT.items()
        }
        description = " ".join((prompt_section(prompt, "Description") or "").split())
        topics = top_words(description, 5) or ["the dataset"]

        lines = []
        for u in range(1, counts["users"] + 1):
            persona = PERSONAS[(u - 1) % len(PERSONAS)]
            lines.append(f"- User {u}: {persona} in {description}")
            for t in range(1, counts["tasks"] + 1):
                topic = topics[(u + t - 2) % len(topics)]
                lines.append(f"  - Task {t}: Understand {topic} as user {u}")
                for q in range(1, counts["questions"] + 1):
                    lines.append(
                        f"    - Question {q}: What does the corpus reveal about {topic} "
                        f"for task {t} of user {u}, angle {q}?"
                    )
        return "\n".join(lines)

    def _judge(self, prompt: str) -> str:
        match self.judge_policy:
            case JudgePolicy.POSITION_A:
                winner = "Answer 1"
            case JudgePolicy.POSITION_B:
                winner = "Answer 2"
            case _:
                first = self.counter.count(prompt_section(prompt, "Answer 1") or "")
                second = self.counter.count(prompt_section(prompt, "Answer 2") or "")
                winner = "Answer 2" if second > first else "Answer 1"

        explanation = f"{winner} under the {self.judge_policy.value} policy."
        verdict = {
            dimension: {"Winner": winner, "Explanation": explanation}
            for dimension in _JUDGE_DIMENSIONS
        }
        return json.dumps(verdict)
