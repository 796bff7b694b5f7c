import logging
from pathlib import Path

from pydantic import BaseModel

from app.core.errors import RagError, RagErrorKind
from app.model.models import DocumentId

logger = logging.getLogger(__name__)

DOCUMENT_SUFFIXES = frozenset({".txt", ".md"})
MANIFEST_SUFFIXES = frozenset({".lst", ".list", ".manifest"})


class Document(BaseModel):
    id: DocumentId
    text: str


def _read(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise RagError(
            message=f"Cannot read document {path}: {exc}",
            kind=RagErrorKind.INGEST,
            details={"path": str(path)},
        ) from exc


def _from_directory(root: Path) -> list[Document]:
    paths = sorted(
        p for p in root.rglob("*") if p.is_file() and p.suffix.lower() in DOCUMENT_SUFFIXES
    )
    return [Document(id=p.relative_to(root).as_posix(), text=_read(p)) for p in paths]


def _from_manifest(manifest: Path) -> list[Document]:
    documents = []
    for line in _read(manifest).splitlines():
        entry = line.strip()
        if not entry or entry.startswith("#"):
            continue
        path = Path(entry)
        if not path.is_absolute():
            path = manifest.parent / path
        if not path.is_file():
            raise RagError(
                message=f"Manifest {manifest} lists a missing file: {entry}",
                kind=RagErrorKind.INGEST,
                details={"path": entry},
            )
        documents.append(Document(id=entry, text=_read(path)))
    return documents


def load_corpus(path: Path) -> list[Document]:
    """Load documents from a directory, a manifest file, or a single file.

    Directory documents are ``*.txt``/``*.md`` files found recursively, with
    ids relative to the directory. Manifest entries keep the id they are
    listed under.

    Raises:
        RagError: INGEST when the path or a listed file is missing
    """
    if path.is_dir():
        documents = _from_directory(path)
    elif path.is_file() and path.suffix.lower() in MANIFEST_SUFFIXES:
        documents = _from_manifest(path)
    elif path.is_file():
        documents = [Document(id=path.name, text=_read(path))]
    else:
        raise RagError(
            message=f"Corpus path does not exist: {path}",
            kind=RagErrorKind.INGEST,
            details={"path": str(path)},
        )

    logger.info("Loaded %d documents from %s", len(documents), path)
    return documents
