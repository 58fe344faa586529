"""Text-generation gateway: one request shape, several providers.

Every prompt is a PromptRequest; its digest (sha256 over the canonical JSON
form) identifies it for logging and for the scripted provider used in tests
and offline runs. Decoding defaults to temperature 0 so reruns are
reproducible.
"""
from __future__ import annotations

import hashlib
import json
import logging
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Protocol

import httpx

from .errors import (
    EmptyCompletionError,
    ProtocolError,
    ProviderStatusError,
    TransportError,
    UnknownPromptError,
    ValidationError,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class DecodeConfig:
    temperature: float = 0.0
    max_output_tokens: int = 256
    seed: int | None = None
    stop_sequences: tuple[str, ...] = ()

    def __post_init__(self):
        if self.temperature < 0:
            raise ValidationError("temperature must be >= 0")
        if self.max_output_tokens < 1:
            raise ValidationError("max_output_tokens must be >= 1")


@dataclass(frozen=True)
class PromptRequest:
    user_text: str
    model: str
    decode: DecodeConfig = DecodeConfig()
    system_text: str | None = None

    def __post_init__(self):
        if not self.user_text:
            raise ValidationError("user_text must be non-empty")
        if not self.model:
            raise ValidationError("model must be non-empty")


def request_digest(request: PromptRequest) -> str:
    """Stable identity for a request: sha256 over its canonical JSON form."""
    canonical = json.dumps(
        {
            "model": request.model,
            "system_text": request.system_text,
            "user_text": request.user_text,
            "decode": {
                "temperature": request.decode.temperature,
                "max_output_tokens": request.decode.max_output_tokens,
                "seed": request.decode.seed,
                "stop_sequences": list(request.decode.stop_sequences),
            },
        },
        ensure_ascii=False,
        sort_keys=True,
        separators=(",", ":"),
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class CompletionResult:
    text: str
    provider_latency_ms: int
    request_digest: str


class GenerationProvider(Protocol):
    def generate(self, request: PromptRequest) -> str: ...


def complete(
    provider: GenerationProvider,
    request: PromptRequest,
    *,
    retries: int = 3,
    backoff: float = 0.5,
    sleep=time.sleep,
) -> CompletionResult:
    """Run one request with bounded retry on transport failures.

    Provider status errors and protocol errors are not retried; an empty
    completion is an error rather than a value.
    """
    digest = request_digest(request)
    last: Exception | None = None
    for attempt in range(retries):
        start = time.perf_counter()
        try:
            text = provider.generate(request)
        except TransportError as e:
            last = e
            if attempt + 1 < retries:
                log.warning("generation attempt %d failed, retrying: %s", attempt + 1, e)
                sleep(backoff * 2**attempt)
                continue
            raise TransportError(f"generation failed after {retries} attempts: {e}") from e
        latency_ms = int((time.perf_counter() - start) * 1000)
        if text == "":
            raise EmptyCompletionError(f"provider returned an empty completion for {digest[:12]}")
        return CompletionResult(text=text, provider_latency_ms=latency_ms, request_digest=digest)
    raise TransportError(f"generation failed after {retries} attempts: {last}") from last


class OllamaGenerationProvider:
    """Non-streaming chat over the /api/chat HTTP endpoint."""

    def __init__(
        self,
        base_url: str,
        *,
        timeout: float = 300.0,
        max_in_flight: int = 4,
        client: httpx.Client | None = None,
    ):
        self.base_url = base_url.rstrip("/")
        self._client = client or httpx.Client(timeout=timeout)
        self._gate = threading.Semaphore(max_in_flight)

    def generate(self, request: PromptRequest) -> str:
        messages = []
        if request.system_text:
            messages.append({"role": "system", "content": request.system_text})
        messages.append({"role": "user", "content": request.user_text})
        options: dict = {
            "temperature": request.decode.temperature,
            "num_predict": request.decode.max_output_tokens,
        }
        if request.decode.seed is not None:
            options["seed"] = request.decode.seed
        if request.decode.stop_sequences:
            options["stop"] = list(request.decode.stop_sequences)
        payload = {
            "model": request.model,
            "messages": messages,
            "stream": False,
            "options": options,
        }
        try:
            with self._gate:
                resp = self._client.post(f"{self.base_url}/api/chat", json=payload)
        except httpx.TransportError as e:
            raise TransportError(f"chat request failed: {e}") from e
        if not 200 <= resp.status_code < 300:
            raise ProviderStatusError(resp.status_code, resp.text[:200])
        try:
            content = resp.json()["message"]["content"]
        except (KeyError, TypeError, ValueError) as e:
            raise ProtocolError(f"chat response missing message content: {e}") from e
        if not isinstance(content, str):
            raise ProtocolError(f"message content is {type(content).__name__}, not str")
        return content


class MockLLMProvider:
    """Scripted provider: answers only what its script covers.

    Script keys are either request digests or 1-based call ordinals (intable
    strings count as ordinals). Unscripted requests raise; the call log is
    synchronized so concurrent pipelines can assert on it.
    """

    def __init__(self, script: Mapping[str, str] | Mapping[int, str]):
        self._by_ordinal: dict[int, str] = {}
        self._by_digest: dict[str, str] = {}
        for key, value in script.items():
            if isinstance(key, int):
                self._by_ordinal[key] = value
            else:
                try:
                    self._by_ordinal[int(key)] = value
                except ValueError:
                    self._by_digest[key] = value
        self._lock = threading.Lock()
        self._calls: list[PromptRequest] = []

    @property
    def calls(self) -> tuple[PromptRequest, ...]:
        with self._lock:
            return tuple(self._calls)

    def generate(self, request: PromptRequest) -> str:
        with self._lock:
            self._calls.append(request)
            ordinal = len(self._calls)
        digest = request_digest(request)
        if digest in self._by_digest:
            return self._by_digest[digest]
        if ordinal in self._by_ordinal:
            return self._by_ordinal[ordinal]
        raise UnknownPromptError(
            f"no scripted response for call #{ordinal} (digest {digest[:12]})"
        )


def load_mock_script(path: str | Path) -> dict[str, str]:
    """Read a JSON object mapping digests or ordinals to completions."""
    p = Path(path)
    try:
        data = json.loads(p.read_text(encoding="utf-8"))
    except OSError as e:
        raise ValidationError(f"cannot read mock script {p}: {e}") from e
    except json.JSONDecodeError as e:
        raise ValidationError(f"mock script {p} is not valid JSON: {e.msg}") from e
    if not isinstance(data, dict) or not all(
        isinstance(k, str) and isinstance(v, str) for k, v in data.items()
    ):
        raise ValidationError(f"mock script {p} must map strings to strings")
    return data
