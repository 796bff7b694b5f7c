from collections.abc import Callable, Iterable

from app.ingest.tokens import TokenCounter
from app.model.ledger import CostLedger

from .base import Completion, LlmProvider
from .constants import COMPLETION_DELIMITER, RECORD_DELIMITER, TUPLE_DELIMITER

CARDIOLOGY_CHUNK = "Cardiologists assess symptoms to identify potential heart issues."

# Scripted extraction for the chunk above; capitalized-phrase rules alone would
# never surface "Heart Disease" from it.
CARDIOLOGY_EXTRACTION = f"""("entity"{TUPLE_DELIMITER}Cardiologists{TUPLE_DELIMITER}person{TUPLE_DELIMITER}Medical specialists who assess symptoms to identify potential heart issues.){RECORD_DELIMITER}
("entity"{TUPLE_DELIMITER}Heart Disease{TUPLE_DELIMITER}event{TUPLE_DELIMITER}Potential heart issues identified by assessing symptoms.){RECORD_DELIMITER}
("relationship"{TUPLE_DELIMITER}Cardiologists{TUPLE_DELIMITER}Heart Disease{TUPLE_DELIMITER}Cardiologists diagnose Heart Disease{TUPLE_DELIMITER}diagnosis, cardiology{TUPLE_DELIMITER}9)
{COMPLETION_DELIMITER}"""

CARDIOLOGY_OVERRIDES = {CARDIOLOGY_CHUNK: CARDIOLOGY_EXTRACTION}


class ScriptedProvider(LlmProvider):
    """Replies from a fixed script, or from a function of the prompt.

    Each call is still accounted by the base class, which makes this the
    tool for call-count and repair-path tests.
    """

    def __init__(
        self,
        ledger: CostLedger,
        responses: Iterable[str | Exception] | Callable[[str], str],
        counter: TokenCounter | None = None,
        max_in_flight: int = 8,
    ):
        super().__init__(ledger, counter, max_in_flight)
        if callable(responses):
            self._respond = responses
            self._script: list[str | Exception] = []
        else:
            self._respond = None
            self._script = list(responses)
        self.prompts: list[str] = []

    @property
    def provider_id(self) -> str:
        return "scripted"

    async def _complete(self, prompt: str, max_tokens: int | None) -> Completion:
        self.prompts.append(prompt)
        if self._respond is not None:
            text = self._respond(prompt)
        else:
            item = self._script.pop(0)
            if isinstance(item, Exception):
                raise item
            text = item
        return Completion(
            text=text,
            tokens_in=self.counter.count(prompt),
            tokens_out=self.counter.count(text),
        )
