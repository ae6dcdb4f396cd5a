"""Generation clients: a chat-completions HTTP client and a scripted mock.

``generate`` owns the retry policy: transient transport failures are retried
with exponential backoff up to an attempt limit, while service refusals
(non-retryable statuses) surface immediately with their status detail.
"""
from __future__ import annotations

import hashlib
import json
import os
import re
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Protocol, runtime_checkable

import requests

from .errors import ServiceRefusalError, TransportFailureError


@dataclass(frozen=True)
class GenerationRequest:
    prompt: str
    temperature: float = 0.0
    max_output_tokens: int = 256
    model_name: str = "gpt-3.5-turbo"

    def __post_init__(self):
        if not self.prompt:
            raise ValueError("prompt must be non-empty")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_output_tokens < 1:
            raise ValueError("max_output_tokens must be positive")


@runtime_checkable
class LlmClient(Protocol):
    def complete(self, request: GenerationRequest) -> str:
        ...


def generate(
    request: GenerationRequest,
    client: LlmClient,
    *,
    max_attempts: int = 3,
    backoff: float = 0.5,
) -> str:
    """Invoke the client, retrying transient failures up to max_attempts total calls."""
    if max_attempts < 1:
        raise ValueError("max_attempts must be positive")
    last: TransportFailureError | None = None
    for attempt in range(max_attempts):
        if attempt and backoff > 0:
            time.sleep(backoff * 2 ** (attempt - 1))
        try:
            return client.complete(request)
        except TransportFailureError as exc:
            last = exc
    raise TransportFailureError(f"generation failed after {max_attempts} attempts: {last}")


def prompt_digest(prompt: str) -> str:
    """Key form under which a mock response can be scripted for one exact prompt."""
    return "sha256:" + hashlib.sha256(prompt.encode("utf-8")).hexdigest()


_ENTRY_IN_PROMPT = re.compile(r"^Dataset: (.*)\nField name: (.*)$", re.MULTILINE)


class MockLlmClient:
    """Scripted client for offline runs and tests.

    Responses are keyed either by prompt digest (``sha256:<hex>``) or by
    entry key (``<dataset>::<field>``, matched against the field section of
    the prompt).  A response value is a plain string, or an object with a
    ``response`` plus optional ``fail_times`` (raise a transport failure that
    many times before answering) or ``refuse`` (always raise a refusal with
    the given detail).
    """

    def __init__(self, responses: Mapping[str, object] | None = None, default: str | None = None):
        self.responses = dict(responses or {})
        self.default = default
        self.calls = 0
        self._failures_left: dict[str, int] = {}

    @classmethod
    def from_file(cls, path: str | Path, default: str | None = None) -> "MockLlmClient":
        return cls(json.loads(Path(path).read_text(encoding="utf-8")), default=default)

    def _lookup(self, prompt: str):
        digest = prompt_digest(prompt)
        if digest in self.responses:
            return digest, self.responses[digest]
        # the field section renders after the one-shot example, so the last
        # dataset/field pair in the prompt is the entry being mapped
        matches = _ENTRY_IN_PROMPT.findall(prompt)
        if matches:
            dataset, field = matches[-1]
            key = f"{dataset}::{field}"
            if key in self.responses:
                return key, self.responses[key]
        if self.default is not None:
            return "", self.default
        return None, None

    def complete(self, request: GenerationRequest) -> str:
        self.calls += 1
        key, scripted = self._lookup(request.prompt)
        if scripted is None:
            raise ServiceRefusalError("no scripted response matches this prompt")
        if isinstance(scripted, str):
            return scripted
        if "refuse" in scripted:
            raise ServiceRefusalError(str(scripted["refuse"]))
        if key not in self._failures_left:
            self._failures_left[key] = int(scripted.get("fail_times", 0))
        if self._failures_left[key] > 0:
            self._failures_left[key] -= 1
            raise TransportFailureError(f"scripted transport failure for {key or 'default'}")
        return str(scripted["response"])


class RemoteChatClient:
    """HTTP client speaking the common chat-completions convention.

    One attempt per call; retry policy lives in ``generate``.  Connection
    errors, 429 and 5xx raise TransportFailureError (retryable); other
    non-2xx statuses raise ServiceRefusalError with the status detail.  The
    bearer token is read from the environment, never from config files.
    """

    def __init__(
        self,
        endpoint: str,
        *,
        api_key_env: str = "FHIRMAP_GENERATOR_API_KEY",
        timeout: float = 60.0,
        session=None,
    ):
        self.endpoint = endpoint
        self.api_key_env = api_key_env
        self.timeout = timeout
        self._session = session or requests

    def complete(self, request: GenerationRequest) -> str:
        payload = {
            "model": request.model_name,
            "messages": [{"role": "user", "content": request.prompt}],
            "temperature": request.temperature,
            "max_tokens": request.max_output_tokens,
        }
        headers = {}
        token = os.environ.get(self.api_key_env, "")
        if token:
            headers["Authorization"] = f"Bearer {token}"
        try:
            response = self._session.post(
                self.endpoint, json=payload, headers=headers, timeout=self.timeout
            )
        except requests.RequestException as exc:
            raise TransportFailureError(f"transport error: {exc}") from exc
        if response.status_code == 429 or response.status_code >= 500:
            raise TransportFailureError(f"retryable status {response.status_code}")
        if response.status_code >= 400:
            raise ServiceRefusalError(
                f"service refused with status {response.status_code}: {response.text[:200]}"
            )
        try:
            body = response.json()
            choice = body["choices"][0]
            if "message" in choice:
                return str(choice["message"]["content"])
            return str(choice["text"])
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            raise ServiceRefusalError(f"malformed completion response: {exc}") from exc
