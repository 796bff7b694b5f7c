import hashlib
import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from app.core.errors import RagError, RagErrorKind
from app.model.ledger import DEFAULT_C_MAX, CostLedger
from app.model.models import (
    Chunk,
    ChunkId,
    Entity,
    KnowledgeGraph,
    KvRecord,
    Relation,
)

from .constants import (
    SECTION_CHUNK,
    SECTION_ENTITY,
    SECTION_KV,
    SECTION_RELATION,
    STORE_FORMAT,
    STORE_FORMAT_VERSION,
)
from .store import GraphStore

logger = logging.getLogger(__name__)


def _line(section: str, payload: dict[str, Any]) -> str:
    return json.dumps(
        {"section": section, **payload},
        sort_keys=True,
        ensure_ascii=False,
        separators=(",", ":"),
    )


def _body_lines(store: GraphStore) -> list[str]:
    graph = store.graph
    lines = [
        _line(SECTION_ENTITY, graph.entities[k].model_dump(mode="json"))
        for k in sorted(graph.entities)
    ]
    lines += [
        _line(SECTION_RELATION, graph.relations[k].model_dump(mode="json"))
        for k in sorted(graph.relations)
    ]
    lines += [
        _line(SECTION_KV, store.kv[k].model_dump(mode="json")) for k in sorted(store.kv)
    ]
    lines += [
        _line(SECTION_CHUNK, store.chunks[k].model_dump(mode="json"))
        for k in sorted(store.chunks)
    ]
    return lines


def _checksum(body: str) -> str:
    return hashlib.sha256(body.encode("utf-8")).hexdigest()


def json_lines(text: str) -> list[str]:
    """Split JSON-lines text on line feeds only.

    Unescaped U+2028, U+2029 and U+0085 are legal inside JSON strings, so
    ``str.splitlines`` would cut records apart.
    """
    return [line for line in text.split("\n") if line.strip()]


def dumps(store: GraphStore) -> str:
    """Serialize a store to its canonical text form.

    Lines are sorted by section and id, so equal stores always serialize to
    identical bytes.
    """
    body = "".join(f"{line}\n" for line in _body_lines(store))
    header = {
        "format": STORE_FORMAT,
        "format_version": STORE_FORMAT_VERSION,
        "version": store.version,
        "sha256": _checksum(body),
        "counts": {
            SECTION_ENTITY: len(store.graph.entities),
            SECTION_RELATION: len(store.graph.relations),
            SECTION_KV: len(store.kv),
            SECTION_CHUNK: len(store.chunks),
        },
    }
    return json.dumps(header, sort_keys=True, separators=(",", ":")) + "\n" + body


def write_atomic(path: Path, text: str) -> None:
    """Write ``text`` to ``path`` through a temp file and a rename.

    Raises:
        RagError: STORAGE when the file cannot be written
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    try:
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        raise RagError(
            message=f"Could not write {path}: {exc}",
            kind=RagErrorKind.STORAGE,
            details={"path": str(path)},
        ) from exc


def save(store: GraphStore, path: Path) -> None:
    """Write ``store`` to ``path`` atomically.

    Raises:
        RagError: STORAGE when the file cannot be written
    """
    write_atomic(path, dumps(store))
    logger.info("Saved store version %d to %s", store.version, path)


def _corrupt(path: Path, reason: str) -> RagError:
    return RagError(
        message=f"Store {path} is corrupt: {reason}",
        kind=RagErrorKind.CHECKSUM,
        details={"path": str(path)},
    )


def _read_header(path: Path, line: str) -> dict[str, Any]:
    try:
        header = json.loads(line)
    except json.JSONDecodeError as exc:
        raise _corrupt(path, "unreadable header") from exc
    if not isinstance(header, dict) or header.get("format") != STORE_FORMAT:
        raise RagError(
            message=f"{path} is not a {STORE_FORMAT} file",
            kind=RagErrorKind.STORAGE,
            details={"path": str(path)},
        )
    found = header.get("format_version")
    if found != STORE_FORMAT_VERSION:
        raise RagError(
            message=(
                f"Store {path} has format version {found}, this build reads "
                f"{STORE_FORMAT_VERSION}; migrate it or re-index the corpus"
            ),
            kind=RagErrorKind.VERSION_MISMATCH,
            details={"path": str(path), "found": found, "expected": STORE_FORMAT_VERSION},
        )
    return header


def loads(text: str, path: Path = Path("<memory>")) -> GraphStore:
    header_line, newline, body = text.partition("\n")
    if not newline:
        raise _corrupt(path, "missing header terminator")
    header = _read_header(path, header_line)
    if header.get("sha256") != _checksum(body):
        raise _corrupt(path, "checksum mismatch")

    entities: list[Entity] = []
    relations: list[Relation] = []
    kv: dict[str, KvRecord] = {}
    chunks: dict[ChunkId, Chunk] = {}
    try:
        for raw in json_lines(body):
            record = json.loads(raw)
            section = record.pop("section", None)
            if section == SECTION_ENTITY:
                entities.append(Entity.model_validate(record))
            elif section == SECTION_RELATION:
                relations.append(Relation.model_validate(record))
            elif section == SECTION_KV:
                item = KvRecord.model_validate(record)
                kv[item.key] = item
            elif section == SECTION_CHUNK:
                chunk = Chunk.model_validate(record)
                chunks[chunk.id] = chunk
            else:
                raise ValueError(f"unknown section {section!r}")
        graph = KnowledgeGraph(entities, relations)
    except (ValueError, ValidationError) as exc:
        raise RagError(
            message=f"Store {path} does not match the expected schema: {exc}",
            kind=RagErrorKind.STORAGE,
            details={"path": str(path)},
        ) from exc
    return GraphStore(graph=graph, kv=kv, chunks=chunks, version=header["version"])


def load(path: Path) -> GraphStore:
    """Read a store written by ``save``.

    Raises:
        RagError: MISSING_STORE if the file does not exist, VERSION_MISMATCH
            for another format version, CHECKSUM for truncated or altered
            files, STORAGE for anything else unreadable
    """
    if not path.exists():
        raise RagError(
            message=f"No store at {path}; run the index command first",
            kind=RagErrorKind.MISSING_STORE,
            details={"path": str(path)},
        )
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise _corrupt(path, str(exc)) from exc
    store = loads(text, path)
    logger.info("Loaded store version %d from %s", store.version, path)
    return store


def save_ledger(ledger: CostLedger, path: Path) -> None:
    write_atomic(path, ledger.model_dump_json(indent=2) + "\n")


def load_ledger(path: Path, c_max: int = DEFAULT_C_MAX) -> CostLedger:
    """Read the cumulative ledger kept next to a store; a fresh one if absent.

    Raises:
        RagError: STORAGE when the file exists but cannot be read
    """
    if not path.exists():
        return CostLedger(c_max=c_max)
    try:
        ledger = CostLedger.model_validate_json(path.read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError, ValidationError) as exc:
        raise RagError(
            message=f"Cost ledger {path} is unreadable: {exc}",
            kind=RagErrorKind.STORAGE,
            details={"path": str(path)},
        ) from exc
    ledger.c_max = c_max
    return ledger
