"""Completion interface: OpenAI-compatible HTTP client plus a scripted mock."""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Protocol

import requests

from .errors import BadStatusError, EmptyResponseError, ExhaustedError, TransportError

ENDPOINT_ENV = "RDOLT_ENDPOINT"
API_KEY_ENV = "RDOLT_API_KEY"

_MAX_RETRIES = 3
_BACKOFF_BASE_S = 0.25  # 250 ms * 2^attempt, < 2 s of waiting worst case


@dataclass(frozen=True)
class CompletionRequest:
    """One chat completion call."""

    user_text: str
    system_text: str = ""
    temperature: float = 0.4
    max_tokens: Optional[int] = None
    model: str = ""

    def __post_init__(self):
        if not self.user_text.strip():
            raise ValueError("user_text must be non-empty")


class Backend(Protocol):
    def complete(self, req: CompletionRequest) -> str: ...


class HttpBackend:
    """Client for any endpoint speaking the chat-completions wire format.

    Transient transport failures (connection errors, timeouts, 429/5xx) are
    retried up to 3 times with exponential backoff.
    """

    def __init__(self, endpoint: str, api_key: str = "", timeout: float = 120.0,
                 session: Optional[requests.Session] = None, sleep=time.sleep):
        if not endpoint:
            raise ValueError("endpoint must be configured")
        self.endpoint = endpoint.rstrip("/")
        self.api_key = api_key
        self.timeout = timeout
        self._session = session or requests.Session()
        self._sleep = sleep

    @classmethod
    def from_env(cls, endpoint: str = "", **kwargs) -> "HttpBackend":
        return cls(
            endpoint=endpoint or os.environ.get(ENDPOINT_ENV, ""),
            api_key=os.environ.get(API_KEY_ENV, ""),
            **kwargs,
        )

    def complete(self, req: CompletionRequest) -> str:
        messages = []
        if req.system_text:
            messages.append({"role": "system", "content": req.system_text})
        messages.append({"role": "user", "content": req.user_text})
        payload = {
            "model": req.model,
            "messages": messages,
            "temperature": req.temperature,
        }
        if req.max_tokens is not None:
            payload["max_tokens"] = req.max_tokens
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"

        url = f"{self.endpoint}/v1/chat/completions"
        last_exc: Optional[Exception] = None
        for attempt in range(_MAX_RETRIES + 1):
            if attempt:
                self._sleep(_BACKOFF_BASE_S * (2 ** (attempt - 1)))
            try:
                resp = self._session.post(url, json=payload, headers=headers,
                                          timeout=self.timeout)
            except requests.RequestException as exc:
                last_exc = TransportError(f"request to {url} failed: {exc}")
                continue
            if resp.status_code == 429 or resp.status_code >= 500:
                last_exc = BadStatusError(resp.status_code, resp.text[:500])
                continue
            if resp.status_code >= 400:
                raise BadStatusError(resp.status_code, resp.text[:500])
            return _extract_text(resp)
        raise last_exc if last_exc else TransportError(f"request to {url} failed")


def _extract_text(resp: requests.Response) -> str:
    try:
        body = resp.json()
        text = body["choices"][0]["message"]["content"]
    except (ValueError, KeyError, IndexError, TypeError):
        raise EmptyResponseError("response carried no assistant message")
    if not text or not text.strip():
        raise EmptyResponseError("assistant message was empty")
    return text


@dataclass
class ScriptedBackend:
    """Replays canned responses in order; deterministic by construction.

    Single-consumer: one run owns a scripted backend. In strict mode the
    backend errors once the script is exhausted; otherwise it repeats the
    final entry, which keeps adversarial loops alive.
    """

    script: list[str]
    cursor: int = 0
    strict: bool = True
    requests: list[CompletionRequest] = field(default_factory=list)

    def complete(self, req: CompletionRequest) -> str:
        self.requests.append(req)
        if self.cursor >= len(self.script):
            if self.strict:
                raise ExhaustedError(
                    f"script exhausted after {len(self.script)} responses")
            return self.script[-1]
        text = self.script[self.cursor]
        self.cursor += 1
        return text

    def remaining(self) -> int:
        return max(0, len(self.script) - self.cursor)


def scripted_replay(script: list[str], strict: bool = True) -> ScriptedBackend:
    """Build a scripted backend from an ordered list of response texts."""
    if not script:
        raise ValueError("script must be non-empty")
    return ScriptedBackend(script=list(script), strict=strict)


def load_script(path: str | Path) -> list[str]:
    """Read a script file: either a JSON list or an object with a 'responses' key."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if isinstance(data, list):
        return [str(x) for x in data]
    if isinstance(data, dict) and isinstance(data.get("responses"), list):
        return [str(x) for x in data["responses"]]
    raise ValueError(f"{path}: expected a JSON list or an object with 'responses'")


def resolve_backend(spec: str, api_key: str = "") -> Backend:
    """Build a backend from a CLI/service spec: 'scripted:<path>' or an endpoint URL."""
    if spec.startswith("scripted:"):
        return scripted_replay(load_script(spec[len("scripted:"):]))
    return HttpBackend(endpoint=spec, api_key=api_key or os.environ.get(API_KEY_ENV, ""))
