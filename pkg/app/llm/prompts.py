"""Prompt templates.

Every prompt opens with a ``---Task: <name>---`` header and is split into
``---Section---`` blocks, which lets deterministic providers dispatch on the
task and read sections back out.
"""

import re

from app.model.models import Entity, Relation

from .constants import (
    COMPLETION_DELIMITER,
    ENTITY_TAG,
    RECORD_DELIMITER,
    RELATION_TAG,
    TUPLE_DELIMITER,
    PromptTask,
)

_TASK_HEADER = re.compile(r"\A---Task: ([a-z_]+)---")
_SECTION_HEADER = re.compile(r"^---([A-Za-z][A-Za-z0-9 ]*)---$", re.MULTILINE)


def _header(task: PromptTask) -> str:
    return f"---Task: {task.value}---"


def prompt_task(prompt: str) -> PromptTask | None:
    match = _TASK_HEADER.match(prompt)
    if match is None:
        return None
    try:
        return PromptTask(match.group(1))
    except ValueError:
        return None


def prompt_section(prompt: str, name: str) -> str | None:
    """Body of the ``---name---`` section, up to the next section header."""
    headers = list(_SECTION_HEADER.finditer(prompt))
    for current, following in zip(headers, [*headers[1:], None]):
        if current.group(1) == name:
            end = following.start() if following else len(prompt)
            return prompt[current.end() : end].strip("\n")
    return None


_EXTRACTION_FORMAT = f"""1. Identify all entities. For each entity, extract:
- entity_name: name of the entity, capitalized as in the text
- entity_type: one of the listed entity types
- entity_description: comprehensive description of the entity's attributes and activities
Format each entity as ("{ENTITY_TAG}"{TUPLE_DELIMITER}<entity_name>{TUPLE_DELIMITER}<entity_type>{TUPLE_DELIMITER}<entity_description>)

2. From the entities of step 1, identify all pairs (source_entity, target_entity) that are clearly related. For each pair, extract:
- source_entity and target_entity: names as identified in step 1
- relationship_description: why the two entities are related
- relationship_keywords: high-level keywords summarizing the relationship, comma separated
- relationship_strength: a number from 0 to 10 for the strength of the relationship
Format each relationship as ("{RELATION_TAG}"{TUPLE_DELIMITER}<source_entity>{TUPLE_DELIMITER}<target_entity>{TUPLE_DELIMITER}<relationship_description>{TUPLE_DELIMITER}<relationship_keywords>{TUPLE_DELIMITER}<relationship_strength>)

3. Put one record per line and separate records with {RECORD_DELIMITER}. Finish with {COMPLETION_DELIMITER}."""


def extraction_prompt(text: str, entity_types: list[str] | tuple[str, ...]) -> str:
    return f"""{_header(PromptTask.ENTITY_EXTRACTION)}
---Goal---
Given a text document and a list of entity types, identify all entities of those types in the text and all relationships among the identified entities.
---Output Format---
{_EXTRACTION_FORMAT}
---Entity Types---
{", ".join(entity_types)}
---Text---
{text}
---Output---
"""


def gleaning_prompt(
    text: str, entity_types: list[str] | tuple[str, ...], previous_output: str
) -> str:
    return f"""{_header(PromptTask.GLEANING)}
---Goal---
Many entities and relationships were missed in the previous extraction. Find additional entities and relationships in the text that are not listed below. Use the same format and do not repeat records already listed.
---Output Format---
{_EXTRACTION_FORMAT}
---Entity Types---
{", ".join(entity_types)}
---Text---
{text}
---Previous Output---
{previous_output}
---Output---
"""


def with_format_reminder(prompt: str) -> str:
    return f"""{prompt.rstrip()}
---Format Reminder---
Your previous answer could not be parsed. Reply with records in the exact format described above and nothing else.
---Output---
"""


def entity_profile_prompt(entity: Entity) -> str:
    descriptions = "\n".join(entity.description_fragments) or entity.name
    return f"""{_header(PromptTask.ENTITY_PROFILE)}
---Goal---
Write one comprehensive paragraph about the entity below, combining all of its descriptions. Resolve contradictions and write in the third person, naming the entity.
---Entity---
{entity.name}
---Type---
{entity.entity_type}
---Descriptions---
{descriptions}
---Output---
"""


def relation_profile_prompt(relation: Relation) -> str:
    descriptions = "\n".join(relation.description_fragments) or str(relation.id)
    return f"""{_header(PromptTask.RELATION_PROFILE)}
---Goal---
Summarize the relationship between the two entities below. Produce one or more short index keys naming the global themes the relationship belongs to, and one summary paragraph.
Reply with a JSON object: {{"keys": ["<theme>", ...], "value": "<paragraph>"}}
---Source---
{relation.source}
---Target---
{relation.target}
---Keywords---
{", ".join(relation.keywords)}
---Descriptions---
{descriptions}
---Output---
"""


def summarize_prompt(name: str, description: str, max_tokens: int) -> str:
    return f"""{_header(PromptTask.SUMMARIZE)}
---Goal---
Condense the description below into at most {max_tokens} tokens while keeping every distinct fact.
---Limit---
{max_tokens}
---Subject---
{name}
---Description---
{description}
---Output---
"""


def keyword_prompt(query: str) -> str:
    return f"""{_header(PromptTask.KEYWORD_EXTRACTION)}
---Goal---
List high-level keywords (overarching concepts or themes) and low-level keywords (specific entities, details or concrete terms) of the query.
Reply with JSON only: {{"high_level_keywords": [...], "low_level_keywords": [...]}}
---Query---
{query}
---Output---
"""


_ANSWER_RULES = """Answer the question using the data tables above. Do not invent facts. If the data does not contain the answer, say so."""


def graph_answer_prompt(query: str, context: str) -> str:
    return f"""{_header(PromptTask.GRAPH_ANSWER)}
---Role---
You are a helpful assistant answering questions about the data in the tables provided.
---Context---
{context}
---Rules---
{_ANSWER_RULES}
---Question---
{query}
---Output---
"""


def naive_answer_prompt(query: str, context: str) -> str:
    return f"""{_header(PromptTask.NAIVE_ANSWER)}
---Role---
You are a helpful assistant answering questions about the documents provided.
---Context---
{context}
---Rules---
{_ANSWER_RULES}
---Question---
{query}
---Output---
"""


def question_generation_prompt(
    description: str, users: int = 5, tasks: int = 5, questions: int = 5
) -> str:
    return f"""{_header(PromptTask.QUESTION_GENERATION)}
---Goal---
Given the dataset description below, identify {users} potential users who would engage with the dataset. For each user, list {tasks} tasks they would perform with it. For each (user, task) combination, write {questions} questions that require an understanding of the entire dataset.
---Output Format---
- User 1: <user description>
  - Task 1: <task description>
    - Question 1: <question>
    - Question 2: <question>
  - Task 2: <task description>
    ...
- User 2: <user description>
  ...
---Description---
{description}
---Output---
"""


def judge_prompt(question: str, answer_1: str, answer_2: str) -> str:
    return f"""{_header(PromptTask.JUDGE)}
---Role---
You are an expert evaluating two answers to the same question on Comprehensiveness, Diversity and Empowerment.
---Criteria---
Comprehensiveness: how much detail does the answer provide to cover all aspects and details of the question?
Diversity: how varied and rich is the answer in providing different perspectives and insights on the question?
Empowerment: how well does the answer help the reader understand and make informed judgments about the topic?
For each criterion choose the better answer and explain why, then choose an overall winner based on the three criteria.
Reply with JSON only:
{{"Comprehensiveness": {{"Winner": "Answer 1 or Answer 2", "Explanation": "..."}}, "Diversity": {{...}}, "Empowerment": {{...}}, "Overall Winner": {{"Winner": "...", "Explanation": "..."}}}}
---Question---
{question}
---Answer 1---
{answer_1}
---Answer 2---
{answer_2}
---Output---
"""
