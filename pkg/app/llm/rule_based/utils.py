"""Text heuristics behind the rule-based provider.

All functions are pure so the provider's output depends on the prompt only.
"""

import re
from collections import Counter

from app.model.models import EntityId, normalize_entity_name

from .constants import (
    EVENT_SUFFIXES,
    LEADING_FUNCTION_WORDS,
    LOCATION_PREPOSITIONS,
    LOCATION_SUFFIXES,
    MAX_KEYWORD_RUN,
    ORGANIZATION_SUFFIXES,
    PERSON_TITLES,
    STOPWORDS,
)

_SENTENCE_SPLIT = re.compile(r"(?<=[.!?])\s+")
_CAPITALIZED_PHRASE = re.compile(r"[A-Z][A-Za-z0-9'&-]*(?:\s+(?:of\s+)?[A-Z][A-Za-z0-9'&-]*)*")
_WORD = re.compile(r"[A-Za-z][A-Za-z0-9'-]*")
_QUOTED = re.compile(r"""(?<!\w)["“']([^"“”']{2,}?)["”'](?!\w)""")


def split_sentences(text: str) -> list[str]:
    return [s.strip() for s in _SENTENCE_SPLIT.split(text) if s.strip()]


def words(text: str) -> list[str]:
    return [w.lower().strip("'-") for w in _WORD.findall(text)]


def content_words(text: str, exclude: set[str] | frozenset[str] = frozenset()) -> list[str]:
    return [w for w in words(text) if len(w) > 2 and w not in STOPWORDS and w not in exclude]


def top_words(text: str, limit: int, exclude: set[str] | frozenset[str] = frozenset()) -> list[str]:
    """Most frequent content words, ties broken by first occurrence."""
    found = content_words(text, exclude)
    counts = Counter(found)
    first_seen = {w: i for i, w in reversed(list(enumerate(found)))}
    ranked = sorted(counts, key=lambda w: (-counts[w], first_seen[w]))
    return ranked[:limit]


def capitalized_phrases(text: str) -> list[str]:
    """Capitalized noun phrases with leading function words stripped."""
    phrases = []
    for match in _CAPITALIZED_PHRASE.finditer(text):
        parts = match.group(0).split()
        while parts and parts[0].lower() in LEADING_FUNCTION_WORDS:
            parts.pop(0)
        if parts and parts[-1].lower() == "of":
            parts.pop()
        phrase = " ".join(parts)
        if len(phrase) > 1:
            phrases.append(phrase)
    return phrases


def classify_entity(phrase: str, sentence: str) -> str:
    tokens = phrase.lower().split()
    first, last = tokens[0].rstrip("."), tokens[-1].rstrip(".")
    if last in ORGANIZATION_SUFFIXES:
        return "organization"
    if last in EVENT_SUFFIXES:
        return "event"
    if last in LOCATION_SUFFIXES:
        return "location"
    if first in PERSON_TITLES:
        return "person"
    preceding = re.search(rf"(\w+)\s+{re.escape(phrase)}", sentence)
    if preceding and preceding.group(1).lower() in LOCATION_PREPOSITIONS:
        return "location"
    return "concept"


def mentions_by_sentence(text: str) -> list[tuple[str, list[str]]]:
    """Sentences paired with the distinct capitalized phrases they mention."""
    result = []
    for sentence in split_sentences(text):
        seen: set[EntityId] = set()
        phrases = []
        for phrase in capitalized_phrases(sentence):
            key = normalize_entity_name(phrase)
            if key not in seen:
                seen.add(key)
                phrases.append(phrase)
        result.append((sentence, phrases))
    return result


def quoted_phrases(text: str) -> list[str]:
    return [m.group(1).strip() for m in _QUOTED.finditer(text)]


def keyword_runs(text: str, exclude: set[str]) -> list[str]:
    """Runs of up to MAX_KEYWORD_RUN consecutive content words."""
    runs: list[str] = []
    current: list[str] = []
    for word in words(text):
        if len(word) > 2 and word not in STOPWORDS and word not in exclude:
            current.append(word)
            if len(current) == MAX_KEYWORD_RUN:
                runs.append(" ".join(current))
                current = []
        elif current:
            runs.append(" ".join(current))
            current = []
    if current:
        runs.append(" ".join(current))
    return runs
