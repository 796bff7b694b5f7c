MOCK_CHAT_COMPLETION_RESPONSE = {
    "id": "chatcmpl-123",
    "object": "chat.completion",
    "created": 1727000000,
    "model": "gpt-4o-mini",
    "choices": [
        {
            "index": 0,
            "message": {
                "role": "assistant",
                "content": '{"high_level_keywords": ["education technology"], '
                '"low_level_keywords": ["artificial intelligence"]}',
            },
            "finish_reason": "stop",
        }
    ],
    "usage": {"prompt_tokens": 57, "completion_tokens": 19, "total_tokens": 76},
}

MOCK_CHAT_COMPLETION_NO_USAGE = {
    "id": "chatcmpl-124",
    "model": "local-model",
    "choices": [
        {
            "index": 0,
            "message": {"role": "assistant", "content": "three word answer"},
            "finish_reason": "stop",
        }
    ],
}

MOCK_EMBEDDING_RESPONSE = {
    "object": "list",
    "data": [
        {"object": "embedding", "index": 1, "embedding": [0.0, 3.0, 4.0]},
        {"object": "embedding", "index": 0, "embedding": [1.0, 0.0, 0.0]},
    ],
    "model": "text-embedding-3-small",
    "usage": {"prompt_tokens": 6, "total_tokens": 6},
}

MOCK_ERROR_429 = {
    "error": {
        "message": "Rate limit reached for requests",
        "type": "requests",
        "code": "rate_limit_exceeded",
    }
}

MOCK_ERROR_400 = {
    "error": {
        "message": "This model's maximum context length is 128000 tokens",
        "type": "invalid_request_error",
        "code": "context_length_exceeded",
    }
}
