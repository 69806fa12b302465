"""Mutation operators: the scripted mock and the hosted chat-completion client.

Operators turn an assembled (system, user) prompt pair into response text.
The engine passes a `tag` identifying the call ("iter:<t>" for evolution,
"tactic:<n>" for tactic generation) so scripted operators stay deterministic
across checkpoint/resume.
"""

from __future__ import annotations

import json
import os
import time
from pathlib import Path
from typing import Protocol

import httpx

from .prompts import ExtractionError, extract_program

API_BASE_ENV = "ARCHIPELAGO_API_BASE"
API_KEY_ENV = "ARCHIPELAGO_API_KEY"
# Fallbacks so existing OpenAI-compatible environments work unchanged.
FALLBACK_BASE_ENV = "OPENAI_BASE_URL"
FALLBACK_KEY_ENV = "OPENAI_API_KEY"
DEFAULT_API_BASE = "https://api.openai.com/v1"


class OperatorError(RuntimeError):
    """The operator could not produce a response (after retries, if any)."""


class MutationOperator(Protocol):
    name: str

    def generate(self, system_text: str, user_text: str, *, tag: str) -> str:
        """Return raw response text for the given prompt pair."""
        ...


class MockScriptOperator:
    """Deterministic operator driven by a tag -> response mapping.

    Script files are JSON: either a flat object of tag -> response text, or
    {"responses": {...}, "default": "..."}. Bare-integer keys ("7") are
    aliases for evolution tags ("iter:7"). A missing tag falls back to
    "default"; with no default the call fails like any other operator error.
    """

    name = "mock"

    def __init__(self, responses: dict[str, str], default: str | None = None):
        self.responses = dict(responses)
        self.default = default

    @classmethod
    def from_file(cls, path: str | Path) -> "MockScriptOperator":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        if not isinstance(data, dict):
            raise ValueError(f"mock script {path} must be a JSON object")
        if "responses" in data:
            return cls(data["responses"], data.get("default"))
        return cls(data)

    def generate(self, system_text: str, user_text: str, *, tag: str) -> str:
        if tag in self.responses:
            return self.responses[tag]
        if tag.startswith("iter:") and tag[5:] in self.responses:
            return self.responses[tag[5:]]
        if self.default is not None:
            return self.default
        raise OperatorError(f"mock script has no response for {tag!r} and no default")


class HttpChatOperator:
    """Chat-completion JSON-over-HTTP client with capped-backoff retries.

    Endpoint and credentials come from the environment (never flags):
    ARCHIPELAGO_API_BASE / ARCHIPELAGO_API_KEY, falling back to
    OPENAI_BASE_URL / OPENAI_API_KEY. Temperature and decoding parameters are
    passed through opaquely; the engine attaches no semantics to them.
    """

    name = "http-chat"

    def __init__(
        self,
        model: str,
        api_base: str | None = None,
        api_key: str | None = None,
        temperature: float | None = None,
        seed: int | None = None,
        timeout: float = 120.0,
        max_attempts: int = 3,
        backoff_base: float = 0.5,
        backoff_cap: float = 8.0,
        client: httpx.Client | None = None,
    ):
        self.model = model
        self.api_base = (
            api_base
            or os.environ.get(API_BASE_ENV)
            or os.environ.get(FALLBACK_BASE_ENV)
            or DEFAULT_API_BASE
        ).rstrip("/")
        self.api_key = api_key or os.environ.get(API_KEY_ENV) or os.environ.get(FALLBACK_KEY_ENV)
        self.temperature = temperature
        self.seed = seed
        self.max_attempts = max_attempts
        self.backoff_base = backoff_base
        self.backoff_cap = backoff_cap
        self._client = client or httpx.Client(timeout=timeout)

    def generate(self, system_text: str, user_text: str, *, tag: str) -> str:
        payload: dict = {
            "model": self.model,
            "messages": [
                {"role": "system", "content": system_text},
                {"role": "user", "content": user_text},
            ],
        }
        if self.temperature is not None:
            payload["temperature"] = self.temperature
        if self.seed is not None:
            payload["seed"] = self.seed

        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"

        last_error: Exception | None = None
        for attempt in range(self.max_attempts):
            if attempt:
                time.sleep(min(self.backoff_base * 2 ** (attempt - 1), self.backoff_cap))
            try:
                response = self._client.post(
                    f"{self.api_base}/chat/completions", json=payload, headers=headers
                )
                if response.status_code in (429,) or response.status_code >= 500:
                    last_error = OperatorError(
                        f"transient HTTP {response.status_code} from {self.api_base}"
                    )
                    continue
                response.raise_for_status()
                content = response.json()["choices"][0]["message"]["content"]
                if not isinstance(content, str):
                    raise TypeError("assistant content is not a string")
                return content
            except (httpx.HTTPError, KeyError, IndexError, TypeError, ValueError) as exc:
                last_error = exc
        raise OperatorError(
            f"chat completion failed after {self.max_attempts} attempts ({tag}): {last_error}"
        ) from last_error


def mutate(operator: MutationOperator, context: tuple[str, str], *, tag: str) -> str:
    """Run one mutation call and extract the child program.

    Raises OperatorError when the operator fails or the response carries no
    code block; the engine records such iterations as sentinel children.
    """
    system_text, user_text = context
    response = operator.generate(system_text, user_text, tag=tag)
    try:
        return extract_program(response)
    except ExtractionError as exc:
        raise OperatorError(f"unusable operator response ({tag}): {exc}") from exc
