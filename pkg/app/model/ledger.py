import threading
from collections.abc import Iterator
from contextlib import contextmanager
from contextvars import ContextVar
from enum import StrEnum

from pydantic import BaseModel, Field, PrivateAttr

DEFAULT_C_MAX = 32_768


class Phase(StrEnum):
    INDEX = "index"
    UPDATE = "update"
    PROFILE = "profile"
    RETRIEVE = "retrieve"
    GENERATE = "generate"
    EVALUATE = "evaluate"


class PhaseCost(BaseModel):
    tokens_in: int = Field(default=0, ge=0)
    tokens_out: int = Field(default=0, ge=0)
    api_calls: int = Field(default=0, ge=0)
    embed_tokens: int = Field(default=0, ge=0)

    def minus(self, other: "PhaseCost") -> "PhaseCost":
        return PhaseCost(
            tokens_in=self.tokens_in - other.tokens_in,
            tokens_out=self.tokens_out - other.tokens_out,
            api_calls=self.api_calls - other.api_calls,
            embed_tokens=self.embed_tokens - other.embed_tokens,
        )

    def plus(self, other: "PhaseCost") -> "PhaseCost":
        return PhaseCost(
            tokens_in=self.tokens_in + other.tokens_in,
            tokens_out=self.tokens_out + other.tokens_out,
            api_calls=self.api_calls + other.api_calls,
            embed_tokens=self.embed_tokens + other.embed_tokens,
        )


def _empty_phases() -> dict[Phase, PhaseCost]:
    return {phase: PhaseCost() for phase in Phase}


# (parent, child) pairs opened by CostLedger.scoped in the current task
_scopes: ContextVar[tuple[tuple["CostLedger", "CostLedger"], ...]] = ContextVar(
    "ledger_scopes", default=()
)


class CostLedger(BaseModel):
    """Per-phase token and API-call counters.

    Counters only ever grow. ``record_call`` is the single place a provider
    round trip is accounted, so ``api_calls`` moves by exactly one per call.
    Extraction calls land in INDEX/UPDATE, profiling in PROFILE, keyword
    extraction in RETRIEVE, answers in GENERATE, question generation and
    judging in EVALUATE.
    """

    phases: dict[Phase, PhaseCost] = Field(default_factory=_empty_phases)
    c_max: int = Field(default=DEFAULT_C_MAX, ge=1)

    _lock: threading.Lock = PrivateAttr(default_factory=threading.Lock)

    def __getitem__(self, phase: Phase) -> PhaseCost:
        return self.phases.setdefault(phase, PhaseCost())

    def record_call(self, phase: Phase, tokens_in: int, tokens_out: int) -> None:
        if tokens_in < 0 or tokens_out < 0:
            raise ValueError("Token counts must be nonnegative")
        self._charge(phase, PhaseCost(tokens_in=tokens_in, tokens_out=tokens_out, api_calls=1))

    def record_embedding(self, phase: Phase, tokens: int) -> None:
        if tokens < 0:
            raise ValueError("Token counts must be nonnegative")
        self._charge(phase, PhaseCost(embed_tokens=tokens))

    def _charge(self, phase: Phase, cost: PhaseCost) -> None:
        self._add(phase, cost)
        for parent, child in _scopes.get():
            if parent is self:
                child._add(phase, cost)

    def _add(self, phase: Phase, cost: PhaseCost) -> None:
        with self._lock:
            self.phases[phase] = self[phase].plus(cost)

    @contextmanager
    def scoped(self) -> Iterator["CostLedger"]:
        """Open a child ledger that also receives this task's charges.

        Scopes live in a context variable, so a charge reaches the child only
        when it is recorded from the opening task or from tasks it spawns.
        Queries run side by side under ``asyncio.gather`` each see their own
        cost.
        """
        child = CostLedger(c_max=self.c_max)
        token = _scopes.set((*_scopes.get(), (self, child)))
        try:
            yield child
        finally:
            _scopes.reset(token)

    def snapshot(self) -> dict[Phase, PhaseCost]:
        with self._lock:
            return {phase: self[phase].model_copy() for phase in Phase}

    def since(self, snapshot: dict[Phase, PhaseCost]) -> dict[Phase, PhaseCost]:
        """Per-phase growth since ``snapshot``."""
        current = self.snapshot()
        return {
            phase: current[phase].minus(snapshot.get(phase, PhaseCost()))
            for phase in Phase
        }

    def absorb(self, other: "CostLedger") -> None:
        """Add another ledger's counters (used to fold a run into history)."""
        with self._lock:
            for phase, cost in other.snapshot().items():
                self.phases[phase] = self[phase].plus(cost)

    @property
    def total_api_calls(self) -> int:
        return sum(cost.api_calls for cost in self.snapshot().values())
