"""Provider-agnostic completion gateway with retries, a bounded in-flight cap,
and a digest-keyed response cache for exact replay of resumed runs."""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Protocol


class ProviderError(RuntimeError):
    """A provider call failed (after retries, when raised by the gateway)."""


@dataclass(frozen=True)
class DecodingParams:
    temperature: float = 1.0
    max_output_tokens: int = 1024
    provider_model_name: str = "offline"

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ValueError(f"temperature must be >= 0, got {self.temperature}")
        if self.max_output_tokens < 1:
            raise ValueError("max_output_tokens must be >= 1")

    def to_dict(self) -> dict:
        return {
            "temperature": self.temperature,
            "max_output_tokens": self.max_output_tokens,
            "provider_model_name": self.provider_model_name,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DecodingParams":
        return cls(
            temperature=float(data.get("temperature", 1.0)),
            max_output_tokens=int(data.get("max_output_tokens", 1024)),
            provider_model_name=str(data.get("provider_model_name", "offline")),
        )


def prompt_digest(prompt: str, params: DecodingParams, attempt: int = 0) -> str:
    """Content digest identifying one completion: stable across processes."""
    import hashlib

    payload: dict = {"prompt": prompt, "params": params.to_dict()}
    if attempt:
        payload["attempt"] = attempt
    canonical = json.dumps(payload, sort_keys=True, ensure_ascii=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class CompletionRecord:
    prompt_digest: str
    response: str
    provider: str
    timestamp: float
    retries: int = 0

    def to_dict(self) -> dict:
        return {
            "prompt_digest": self.prompt_digest,
            "response": self.response,
            "provider": self.provider,
            "timestamp": self.timestamp,
            "retries": self.retries,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CompletionRecord":
        return cls(
            prompt_digest=data["prompt_digest"],
            response=data["response"],
            provider=data.get("provider", "unknown"),
            timestamp=float(data.get("timestamp", 0.0)),
            retries=int(data.get("retries", 0)),
        )


class CompletionCache:
    """Append-only response store keyed by prompt digest.

    Concurrent readers are free; writes are first-write-wins per digest so a
    resumed run always replays one canonical response. With a directory the
    cache survives process restarts; without one it is in-memory only.
    """

    def __init__(self, root: str | Path | None = None):
        self.root = Path(root) if root is not None else None
        if self.root is not None:
            self.root.mkdir(parents=True, exist_ok=True)
        self._memory: dict[str, CompletionRecord] = {}
        self._lock = threading.Lock()

    def _path(self, digest: str) -> Path:
        assert self.root is not None
        return self.root / f"{digest}.json"

    def get(self, digest: str) -> CompletionRecord | None:
        if self.root is None:
            with self._lock:
                return self._memory.get(digest)
        path = self._path(digest)
        if not path.exists():
            return None
        return CompletionRecord.from_dict(json.loads(path.read_text(encoding="utf-8")))

    def put(self, record: CompletionRecord) -> CompletionRecord:
        """Store a record; returns the canonical (first-written) record."""
        if self.root is None:
            with self._lock:
                return self._memory.setdefault(record.prompt_digest, record)
        path = self._path(record.prompt_digest)
        payload = json.dumps(record.to_dict(), ensure_ascii=False)
        try:
            fd = os.open(path, os.O_WRONLY | os.O_CREAT | os.O_EXCL)
        except FileExistsError:
            return CompletionRecord.from_dict(json.loads(path.read_text(encoding="utf-8")))
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(payload)
        return record

    def __len__(self) -> int:
        if self.root is None:
            with self._lock:
                return len(self._memory)
        return sum(1 for _ in self.root.glob("*.json"))


class Provider(Protocol):
    name: str

    def complete(self, prompt: str, params: DecodingParams) -> str: ...


class ScriptedProvider:
    """Deterministic table- or callable-driven provider for tests and replay.

    ``script`` maps exact prompts to responses, or is a callable
    ``(prompt, params) -> response``. Counts every invocation so tests can
    observe cache behaviour.
    """

    def __init__(
        self,
        script: Mapping[str, str] | Callable[[str, DecodingParams], str],
        name: str = "scripted",
    ):
        self._script = script
        self.name = name
        self.calls = 0
        self._lock = threading.Lock()

    def complete(self, prompt: str, params: DecodingParams) -> str:
        with self._lock:
            self.calls += 1
        if callable(self._script):
            return self._script(prompt, params)
        try:
            return self._script[prompt]
        except KeyError:
            raise ProviderError(f"scripted provider has no entry for prompt: {prompt[:80]!r}")


class HttpProvider:
    """OpenAI-style chat-completions provider.

    Endpoint and model come from a config file; the API key is read from an
    environment variable so credentials never land in run manifests.
    """

    def __init__(
        self,
        endpoint: str,
        model: str,
        api_key_env: str = "HYPOFORGE_API_KEY",
        timeout: float = 120.0,
        extra_headers: Mapping[str, str] | None = None,
    ):
        self.endpoint = endpoint
        self.model = model
        self.api_key_env = api_key_env
        self.timeout = timeout
        self.extra_headers = dict(extra_headers or {})
        self.name = f"http:{model}"

    def complete(self, prompt: str, params: DecodingParams) -> str:
        import requests

        headers = {"Content-Type": "application/json", **self.extra_headers}
        api_key = os.environ.get(self.api_key_env, "")
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        body = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": params.temperature,
            "max_tokens": params.max_output_tokens,
        }
        try:
            response = requests.post(
                self.endpoint, json=body, headers=headers, timeout=self.timeout
            )
        except requests.RequestException as exc:
            raise ProviderError(f"request to {self.endpoint} failed: {exc}") from exc
        if response.status_code != 200:
            raise ProviderError(
                f"provider returned HTTP {response.status_code}: {response.text[:200]}"
            )
        try:
            payload = response.json()
            text = payload["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise ProviderError(f"malformed provider response: {exc}") from exc
        if not isinstance(text, str):
            raise ProviderError("provider response content is not text")
        return text


@dataclass
class GatewayStats:
    provider_calls: int = 0
    cache_hits: int = 0
    retries: int = 0
    failures: int = 0

    def to_dict(self) -> dict:
        return {
            "provider_calls": self.provider_calls,
            "cache_hits": self.cache_hits,
            "retries": self.retries,
            "failures": self.failures,
        }


class LlmGateway:
    """Single entry point for completions: caching, bounded concurrency, and
    retry with exponential backoff around any Provider."""

    def __init__(
        self,
        provider: Provider,
        cache: CompletionCache | None = None,
        params: DecodingParams | None = None,
        max_retries: int = 3,
        backoff_base: float = 0.5,
        backoff_cap: float = 8.0,
        max_in_flight: int | None = None,
        min_interval: float = 0.0,
        trace_path: str | Path | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        if max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if min_interval < 0:
            raise ValueError("min_interval must be >= 0")
        self.provider = provider
        self.cache = cache if cache is not None else CompletionCache()
        self.params = params if params is not None else DecodingParams()
        self.max_retries = max_retries
        self.backoff_base = backoff_base
        self.backoff_cap = backoff_cap
        self.min_interval = min_interval
        self._sleep = sleep
        self._semaphore = (
            threading.BoundedSemaphore(max_in_flight) if max_in_flight else None
        )
        self._pace_lock = threading.Lock()
        self._last_call_at = 0.0
        self.trace_path = Path(trace_path) if trace_path else None
        self._trace_lock = threading.Lock()
        self.stats = GatewayStats()
        self._stats_lock = threading.Lock()

    def _pace(self) -> None:
        # spaces provider-call starts at least min_interval apart; cache hits
        # never pace
        if self.min_interval <= 0:
            return
        with self._pace_lock:
            wait = self._last_call_at + self.min_interval - time.monotonic()
            if wait > 0:
                self._sleep(wait)
            self._last_call_at = time.monotonic()

    def complete(
        self,
        prompt: str,
        params: DecodingParams | None = None,
        attempt: int = 0,
    ) -> str:
        """Return the completion for ``prompt``, from cache when possible.

        ``attempt`` salts the cache key: parse-level retries pass attempt=1,2,…
        to force a fresh sample while keeping every sample replayable.
        """
        if not prompt:
            raise ValueError("prompt must be non-empty")
        params = params or self.params
        digest = prompt_digest(prompt, params, attempt)
        cached = self.cache.get(digest)
        if cached is not None:
            with self._stats_lock:
                self.stats.cache_hits += 1
            self._trace(digest, prompt, cached.response, cached=True, retries=cached.retries)
            return cached.response

        retries_used = 0
        last_error: Exception | None = None
        for try_index in range(self.max_retries + 1):
            try:
                if self._semaphore is not None:
                    with self._semaphore:
                        self._pace()
                        text = self.provider.complete(prompt, params)
                else:
                    self._pace()
                    text = self.provider.complete(prompt, params)
                with self._stats_lock:
                    self.stats.provider_calls += 1
                    self.stats.retries += retries_used
                record = self.cache.put(
                    CompletionRecord(
                        prompt_digest=digest,
                        response=text,
                        provider=self.provider.name,
                        timestamp=time.time(),
                        retries=retries_used,
                    )
                )
                self._trace(digest, prompt, record.response, cached=False, retries=retries_used)
                return record.response
            except ProviderError as exc:
                last_error = exc
                if try_index == self.max_retries:
                    break
                retries_used += 1
                self._sleep(min(self.backoff_base * (2**try_index), self.backoff_cap))
        with self._stats_lock:
            self.stats.failures += 1
        raise ProviderError(
            f"provider failed after {self.max_retries} retries: {last_error}"
        ) from last_error

    def _trace(self, digest: str, prompt: str, response: str, cached: bool, retries: int) -> None:
        if self.trace_path is None:
            return
        record = {
            "digest": digest,
            "provider": self.provider.name,
            "cached": cached,
            "retries": retries,
            "prompt": prompt,
            "response": response,
            "timestamp": time.time(),
        }
        line = json.dumps(record, ensure_ascii=False)
        with self._trace_lock:
            self.trace_path.parent.mkdir(parents=True, exist_ok=True)
            with self.trace_path.open("a", encoding="utf-8") as handle:
                handle.write(line + "\n")


def provider_from_config(config: Mapping | str | Path) -> Provider:
    """Build a provider from a config mapping or a JSON config file.

    Supported types: ``http`` (endpoint/model/api_key_env) and ``offline``
    (deterministic rule-based stand-in, no network).
    """
    if isinstance(config, (str, Path)):
        config = json.loads(Path(config).read_text(encoding="utf-8"))
    kind = config.get("type", "offline")
    if kind == "http":
        for key in ("endpoint", "model"):
            if key not in config:
                raise ValueError(f"http provider config requires {key!r}")
        return HttpProvider(
            endpoint=config["endpoint"],
            model=config["model"],
            api_key_env=config.get("api_key_env", "HYPOFORGE_API_KEY"),
            timeout=float(config.get("timeout", 120.0)),
        )
    if kind == "offline":
        from .offline import OfflineProvider

        return OfflineProvider(
            prefer_titles=config.get("prefer_titles"),
            seed_salt=str(config.get("seed_salt", "")),
        )
    raise ValueError(f"unknown provider type {kind!r}")
