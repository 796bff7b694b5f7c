import os

import httpx
from pydantic import BaseModel, ValidationError

from app.core.errors import RagError, RagErrorKind
from app.core.http import RETRYABLE_STATUS_CODES

from .models import OpenAIError


def read_api_key(env_var: str) -> str:
    """Read the API key from the environment variable named in settings.

    Raises:
        RagError: INVALID_CONFIG when the variable is unset or empty
    """
    key = os.getenv(env_var, "").strip()
    if not key:
        raise RagError(
            message=f"Environment variable {env_var} holding the provider API key is not set",
            kind=RagErrorKind.INVALID_CONFIG,
        )
    return key


def error_from_response(response: httpx.Response, kind: RagErrorKind) -> RagError:
    try:
        message = OpenAIError.model_validate(response.json()).error.message
    except Exception:
        message = ""
    return RagError(
        message=message or f"Provider error (status {response.status_code})",
        kind=kind,
        retryable=response.status_code in RETRYABLE_STATUS_CODES,
        details={"status_code": response.status_code},
    )


def decode_body[M: BaseModel](response: httpx.Response, model: type[M], kind: RagErrorKind) -> M:
    """Validate a 2xx body against ``model``.

    Raises:
        RagError: ``kind`` when the body is not JSON or does not match the schema
    """
    try:
        return model.model_validate_json(response.content)
    except ValidationError as exc:
        raise RagError(
            message=f"Unreadable {model.__name__} body (status {response.status_code})",
            kind=kind,
            details={"status_code": response.status_code, "errors": exc.error_count()},
        ) from exc
