from enum import Enum, IntEnum


class ExitCode(IntEnum):
    """Process exit codes, one per failing phase."""

    OK = 0
    FAILURE = 1
    CONFIG = 2
    INGEST = 3
    EXTRACTION = 4
    STORAGE = 5
    RETRIEVAL = 6
    GENERATION = 7
    EVALUATION = 8


class RagErrorKind(str, Enum):
    INVALID_NAME = "INVALID_NAME"
    INVALID_CONFIG = "INVALID_CONFIG"
    INGEST = "INGEST"
    PROVIDER = "PROVIDER"
    PROMPT_TOO_LARGE = "PROMPT_TOO_LARGE"
    EXTRACTION = "EXTRACTION"
    PARSE = "PARSE"
    PROFILING = "PROFILING"
    EMBEDDING = "EMBEDDING"
    KEYWORD_EXTRACTION = "KEYWORD_EXTRACTION"
    STALE_INDEX = "STALE_INDEX"
    GENERATION = "GENERATION"
    QUESTION_GENERATION = "QUESTION_GENERATION"
    JUDGE = "JUDGE"
    STORAGE = "STORAGE"
    VERSION_MISMATCH = "VERSION_MISMATCH"
    CHECKSUM = "CHECKSUM"
    MISSING_STORE = "MISSING_STORE"

    @property
    def exit_code(self) -> ExitCode:
        return _EXIT_CODES.get(self, ExitCode.FAILURE)


_EXIT_CODES = {
    RagErrorKind.INVALID_CONFIG: ExitCode.CONFIG,
    RagErrorKind.INGEST: ExitCode.INGEST,
    RagErrorKind.INVALID_NAME: ExitCode.EXTRACTION,
    RagErrorKind.EXTRACTION: ExitCode.EXTRACTION,
    RagErrorKind.PARSE: ExitCode.EXTRACTION,
    RagErrorKind.PROFILING: ExitCode.EXTRACTION,
    RagErrorKind.STORAGE: ExitCode.STORAGE,
    RagErrorKind.VERSION_MISMATCH: ExitCode.STORAGE,
    RagErrorKind.CHECKSUM: ExitCode.STORAGE,
    RagErrorKind.MISSING_STORE: ExitCode.STORAGE,
    RagErrorKind.EMBEDDING: ExitCode.RETRIEVAL,
    RagErrorKind.KEYWORD_EXTRACTION: ExitCode.RETRIEVAL,
    RagErrorKind.STALE_INDEX: ExitCode.RETRIEVAL,
    RagErrorKind.GENERATION: ExitCode.GENERATION,
    RagErrorKind.QUESTION_GENERATION: ExitCode.EVALUATION,
    RagErrorKind.JUDGE: ExitCode.EVALUATION,
}


class RagError(Exception):
    def __init__(
        self,
        message: str,
        kind: RagErrorKind = RagErrorKind.PROVIDER,
        *,
        retryable: bool = False,
        details: dict | None = None,
    ):
        self.message = message
        self.kind = kind
        self.retryable = retryable
        self.details = details or {}
        super().__init__(self.message)

    @property
    def exit_code(self) -> ExitCode:
        return self.kind.exit_code

    def as_dict(self) -> dict:
        return {
            "message": self.message,
            "kind": self.kind.value,
            "retryable": self.retryable,
            "details": self.details,
        }

    def rewrap(self, kind: RagErrorKind, message: str, **details) -> "RagError":
        """Re-tag a lower-level error with the phase that was running.

        The retryable flag is preserved so callers further up can still
        decide whether the failure is transient.
        """
        return RagError(
            message=f"{message}: {self.message}",
            kind=kind,
            retryable=self.retryable,
            details={**self.details, **details, "cause": self.kind.value},
        )
