from enum import StrEnum

TUPLE_DELIMITER = "<|>"
RECORD_DELIMITER = "##"
COMPLETION_DELIMITER = "<|COMPLETE|>"

ENTITY_TAG = "entity"
RELATION_TAG = "relationship"


class PromptTask(StrEnum):
    """Names carried in the ``---Task: <name>---`` header of every prompt."""

    ENTITY_EXTRACTION = "entity_extraction"
    GLEANING = "gleaning"
    ENTITY_PROFILE = "entity_profile"
    RELATION_PROFILE = "relation_profile"
    SUMMARIZE = "summarize"
    KEYWORD_EXTRACTION = "keyword_extraction"
    GRAPH_ANSWER = "graph_answer"
    NAIVE_ANSWER = "naive_answer"
    QUESTION_GENERATION = "question_generation"
    JUDGE = "judge"
