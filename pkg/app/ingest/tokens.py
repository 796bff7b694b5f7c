"""Token counters used for chunking, prompt limits and cost accounting."""

from abc import ABC, abstractmethod
from functools import cache

from app.config import TokenCounterKind


class TokenCounter(ABC):
    """Splits text into tokens and joins token spans back into text.

    ``decode(encode(text))`` need not reproduce the original whitespace, but
    it must be stable so chunking stays byte-identical across runs.
    """

    @property
    @abstractmethod
    def name(self) -> str:
        pass

    @abstractmethod
    def encode(self, text: str) -> list:
        pass

    @abstractmethod
    def decode(self, tokens: list) -> str:
        pass

    def count(self, text: str) -> int:
        return len(self.encode(text))


class WhitespaceTokenCounter(TokenCounter):
    @property
    def name(self) -> str:
        return TokenCounterKind.WHITESPACE.value

    def encode(self, text: str) -> list[str]:
        return text.split()

    def decode(self, tokens: list) -> str:
        return " ".join(tokens)


class TiktokenCounter(TokenCounter):
    """Provider-tokenizer counter backed by ``tiktoken``."""

    def __init__(self, encoding: str = "cl100k_base"):
        import tiktoken

        self._encoding_name = encoding
        self._encoding = tiktoken.get_encoding(encoding)

    @property
    def name(self) -> str:
        return f"{TokenCounterKind.TIKTOKEN.value}:{self._encoding_name}"

    def encode(self, text: str) -> list[int]:
        return self._encoding.encode(text, disallowed_special=())

    def decode(self, tokens: list) -> str:
        return self._encoding.decode(tokens)


@cache
def get_counter(
    kind: TokenCounterKind = TokenCounterKind.WHITESPACE,
    encoding: str = "cl100k_base",
) -> TokenCounter:
    match kind:
        case TokenCounterKind.WHITESPACE:
            return WhitespaceTokenCounter()
        case TokenCounterKind.TIKTOKEN:
            return TiktokenCounter(encoding)
        case _:
            raise ValueError(f"Unknown token counter: {kind}")


def count_tokens(text: str, counter: TokenCounter | None = None) -> int:
    return (counter or get_counter()).count(text)
