import json
import logging
import re
from typing import Any

from app.core.errors import RagError, RagErrorKind
from app.llm.constants import (
    COMPLETION_DELIMITER,
    ENTITY_TAG,
    RECORD_DELIMITER,
    RELATION_TAG,
    TUPLE_DELIMITER,
)
from app.model.constants import UNKNOWN_ENTITY_TYPE

from .models import ExtractionResult, RawEntity, RawRelation

logger = logging.getLogger(__name__)

_RECORD_BODY = re.compile(r"\((.*)\)", re.DOTALL)
_RECORD_SPLIT = re.compile(rf"{re.escape(RECORD_DELIMITER)}|\n")
_JSON_OBJECT = re.compile(r"\{.*\}", re.DOTALL)


def normalize_strength(raw: str) -> float:
    """Map an extractor strength onto [0, 1].

    Values already in [0, 1] are kept, values up to 10 are read as a 0-10
    scale, larger values clamp to 1 and negatives to 0. Unparseable input
    counts as full strength.
    """
    try:
        value = float(raw.strip())
    except ValueError:
        return 1.0
    if value != value or value < 0:  # NaN or negative
        return 0.0
    if value <= 1:
        return value
    if value <= 10:
        return value / 10
    return 1.0


def _strip_field(field: str) -> str:
    return field.strip().strip('"').strip()


def _split_keywords(raw: str) -> tuple[str, ...]:
    return tuple(k.strip() for k in raw.split(",") if k.strip())


def _parse_record(record: str) -> RawEntity | RawRelation | None:
    match = _RECORD_BODY.search(record)
    if match is None:
        return None
    fields = [_strip_field(f) for f in match.group(1).split(TUPLE_DELIMITER)]
    tag = fields[0].lower()

    if tag == ENTITY_TAG and len(fields) >= 3 and fields[1]:
        return RawEntity(
            name=fields[1],
            entity_type=fields[2].lower() or UNKNOWN_ENTITY_TYPE,
            description=fields[3] if len(fields) > 3 else "",
        )
    if tag == RELATION_TAG and len(fields) >= 4 and fields[1] and fields[2]:
        return RawRelation(
            source=fields[1],
            target=fields[2],
            description=fields[3],
            keywords=_split_keywords(fields[4]) if len(fields) > 4 else (),
            strength=normalize_strength(fields[5]) if len(fields) > 5 else 1.0,
        )
    return None


def strip_completion(raw: str) -> str:
    return raw.replace(COMPLETION_DELIMITER, "").strip()


def parse_extraction_output(raw: str) -> ExtractionResult:
    """Parse delimited extraction records.

    Records are split on the record delimiter and on newlines. Anything that
    is not a well-formed entity or relationship record counts as a warning.

    Raises:
        RagError: PARSE when no record can be parsed, with the raw text attached
    """
    result = ExtractionResult()
    for record in _RECORD_SPLIT.split(strip_completion(raw)):
        if not record.strip():
            continue
        parsed = _parse_record(record)
        if isinstance(parsed, RawEntity):
            result.entities.append(parsed)
        elif isinstance(parsed, RawRelation):
            result.relations.append(parsed)
        else:
            result.warnings += 1

    if result.is_empty():
        raise RagError(
            message="No parseable extraction records in provider output",
            kind=RagErrorKind.PARSE,
            details={"raw": raw},
        )
    if result.warnings:
        logger.warning("Skipped %d malformed extraction records", result.warnings)
    return result


def parse_json_object(raw: str) -> dict[str, Any]:
    """Extract the outermost JSON object from a model reply.

    Tolerates code fences and chatter around the object.

    Raises:
        ValueError: If no JSON object can be decoded
    """
    match = _JSON_OBJECT.search(raw)
    if match is None:
        raise ValueError("No JSON object found")
    data = json.loads(match.group(0))
    if not isinstance(data, dict):
        raise ValueError("Expected a JSON object")
    return data
