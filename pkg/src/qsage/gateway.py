"""Model access: an HTTP chat-completions client and a deterministic replay
provider, plus code extraction from model replies.

The HTTP client speaks the de-facto chat-completions wire shape (JSON
``messages`` array in, first choice's ``message.content`` out), retries
transient transport failures with exponential backoff, and reports auth
problems, retry exhaustion, and malformed responses as distinct errors so the
episode loop can record them as infrastructure failures rather than solver
failures.  The replay provider returns pre-recorded replies in order and is
bit-deterministic.
"""

from __future__ import annotations

import ast
import os
import re
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence
from urllib.parse import urlparse

from .prompts import Conversation


class GatewayError(RuntimeError):
    """Base class for turn-level infrastructure errors."""


class AuthConfigError(GatewayError):
    pass


class TransportExhaustedError(GatewayError):
    pass


class MalformedResponseError(GatewayError):
    pass


class ReplayExhaustedError(GatewayError):
    pass


RETRYABLE_STATUS = (429, 500, 502, 503, 504)


@dataclass(frozen=True)
class ModelConfig:
    model_id: str
    provider: str = "http"
    endpoint: str = ""
    auth_env: str = ""
    temperature: float = 0.2
    max_tokens: int = 4096
    request_timeout_s: float = 120.0
    max_attempts: int = 3
    backoff_s: float = 0.5
    requests_per_minute: Optional[float] = None
    fixture_dir: Optional[str] = None

    def __post_init__(self) -> None:
        if self.provider not in ("http", "replay"):
            raise ValueError(f"unknown provider {self.provider!r}")
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")
        if self.provider == "http":
            parsed = urlparse(self.endpoint)
            if parsed.scheme not in ("http", "https") or not parsed.netloc:
                raise ValueError(f"endpoint is not a well-formed URL: {self.endpoint!r}")
        if self.provider == "replay" and not self.fixture_dir:
            raise ValueError("replay provider needs a fixture_dir")

    def to_dict(self) -> dict:
        return {
            "model_id": self.model_id,
            "provider": self.provider,
            "endpoint": self.endpoint,
            "auth_env": self.auth_env,
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
            "request_timeout_s": self.request_timeout_s,
            "max_attempts": self.max_attempts,
            "backoff_s": self.backoff_s,
            "requests_per_minute": self.requests_per_minute,
            "fixture_dir": self.fixture_dir,
        }


@dataclass(frozen=True)
class GenerationResult:
    raw_text: str
    extracted_code: Optional[str]
    latency_s: float
    attempts: int = 1
    provider_meta: tuple[tuple[str, str], ...] = ()


class _RateLimiter:
    """Token-bucket limiter shared by all calls through one provider."""

    def __init__(self, requests_per_minute: Optional[float]) -> None:
        self._interval = 60.0 / requests_per_minute if requests_per_minute else 0.0
        self._lock = threading.Lock()
        self._next_slot = 0.0

    def wait(self) -> None:
        if self._interval <= 0:
            return
        with self._lock:
            now = time.monotonic()
            slot = max(now, self._next_slot)
            self._next_slot = slot + self._interval
        delay = slot - now
        if delay > 0:
            time.sleep(delay)


class HttpChatProvider:
    """Chat-completions client; shareable across concurrent episodes."""

    def __init__(self, config: ModelConfig, session=None) -> None:
        if config.provider != "http":
            raise ValueError("config is not for the http provider")
        self.config = config
        self._limiter = _RateLimiter(config.requests_per_minute)
        if session is None:
            import requests

            session = requests.Session()
        self._session = session

    def _token(self) -> str:
        if not self.config.auth_env:
            raise AuthConfigError("no auth env var configured for the http provider")
        token = os.environ.get(self.config.auth_env)
        if not token:
            raise AuthConfigError(
                f"auth env var {self.config.auth_env!r} is not set"
            )
        return token

    def generate(self, conv: Conversation) -> GenerationResult:
        import requests

        token = self._token()
        payload = {
            "model": self.config.model_id,
            "messages": [
                {"role": m.role, "content": m.text} for m in conv.messages
            ],
            "temperature": self.config.temperature,
            "max_tokens": self.config.max_tokens,
        }
        headers = {"Authorization": f"Bearer {token}"}
        start = time.monotonic()
        last_error: Optional[str] = None
        for attempt in range(1, self.config.max_attempts + 1):
            self._limiter.wait()
            try:
                response = self._session.post(
                    self.config.endpoint,
                    json=payload,
                    headers=headers,
                    timeout=self.config.request_timeout_s,
                )
            except requests.RequestException as exc:
                last_error = f"transport error: {exc}"
            else:
                if response.status_code in (401, 403):
                    raise AuthConfigError(
                        f"authentication rejected (HTTP {response.status_code})"
                    )
                if response.status_code == 200:
                    text = _extract_choice(response)
                    latency = time.monotonic() - start
                    return GenerationResult(
                        raw_text=text,
                        extracted_code=extract_code(text),
                        latency_s=latency,
                        attempts=attempt,
                        provider_meta=(("status", "200"),),
                    )
                if response.status_code in RETRYABLE_STATUS:
                    last_error = f"HTTP {response.status_code}"
                else:
                    raise MalformedResponseError(
                        f"unexpected HTTP status {response.status_code}"
                    )
            if attempt < self.config.max_attempts:
                time.sleep(self.config.backoff_s * 2 ** (attempt - 1))
        raise TransportExhaustedError(
            f"gave up after {self.config.max_attempts} attempts ({last_error})"
        )


def _extract_choice(response) -> str:
    try:
        doc = response.json()
    except ValueError as exc:
        raise MalformedResponseError(f"response body is not JSON: {exc}") from None
    try:
        content = doc["choices"][0]["message"]["content"]
    except (KeyError, IndexError, TypeError):
        raise MalformedResponseError(
            "response missing choices[0].message.content"
        ) from None
    if not isinstance(content, str):
        raise MalformedResponseError("message content is not text")
    return content


class ReplayProvider:
    """Returns canned replies in order; exhaustion is an infrastructure error."""

    def __init__(self, replies: Sequence[str]) -> None:
        self._replies = list(replies)
        self._cursor = 0
        self._lock = threading.Lock()

    @classmethod
    def from_dir(cls, fixture_dir: str) -> "ReplayProvider":
        root = Path(fixture_dir)
        if not root.is_dir():
            raise FileNotFoundError(f"replay fixture dir not found: {fixture_dir}")
        files = sorted(p for p in root.iterdir() if p.is_file())
        if not files:
            raise FileNotFoundError(f"replay fixture dir is empty: {fixture_dir}")
        return cls([p.read_text(encoding="utf-8") for p in files])

    def generate(self, conv: Conversation) -> GenerationResult:
        with self._lock:
            if self._cursor >= len(self._replies):
                raise ReplayExhaustedError(
                    f"replay fixtures exhausted after {len(self._replies)} replies"
                )
            text = self._replies[self._cursor]
            self._cursor += 1
            position = self._cursor
        return GenerationResult(
            raw_text=text,
            extracted_code=extract_code(text),
            latency_s=0.0,
            attempts=1,
            provider_meta=(("replay_index", str(position)),),
        )


def build_provider(config: ModelConfig):
    if config.provider == "replay":
        return ReplayProvider.from_dir(config.fixture_dir)
    return HttpChatProvider(config)


def generate(provider, conv: Conversation) -> GenerationResult:
    """Uniform entry point over either provider kind."""
    return provider.generate(conv)


_FENCE = re.compile(r"```[ \t]*[A-Za-z0-9_+-]*[ \t]*\r?\n(.*?)```", re.DOTALL)
_STATEMENT_PATTERNS = tuple(
    re.compile(p)
    for p in (
        r"^\s*(import|from)\s+\w",
        r"^\s*(def|class)\s+\w",
        r"^\s*(if|elif|else\b|for|while|try\b|except|finally\b|with|return|raise|pass\b|break\b|continue\b)",
        r"^\s*[\w.,\[\]() ]+=[^=]",
        r"^\s*[\w.]+\(.*\)",
        r"^\s*#",
        r"^\s*@\w",
    )
)


def _statement_like(line: str) -> bool:
    return any(p.match(line) for p in _STATEMENT_PATTERNS)


def _plausible_code(text: str) -> bool:
    """Heuristic for replies that are code without fences.

    Deliberately strict so that prose explanations stay classified as
    generation failures: either at least three non-blank lines with a 60%
    statement-like majority, or a reply that compiles as Python and contains
    at least one statement-like line.
    """
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        return False
    hits = sum(1 for ln in lines if _statement_like(ln))
    if len(lines) >= 3 and hits >= 0.6 * len(lines):
        return True
    if hits >= 1:
        try:
            ast.parse(text)
        except SyntaxError:
            return False
        return True
    return False


def extract_code(raw_text: str) -> Optional[str]:
    """Pull the solver script out of a model reply.

    Largest fenced code block if any; otherwise the whole reply when it looks
    like bare code under the plausibility heuristic; otherwise None.
    Idempotent: running extraction on an already-extracted script returns it
    unchanged.
    """
    blocks = _FENCE.findall(raw_text)
    if blocks:
        return max(blocks, key=len).strip("\n")
    if _plausible_code(raw_text):
        return raw_text
    return None
