"""LLM backends: an Ollama-compatible HTTP client, a deterministic mock and a transcript replayer.

Every call goes through :class:`LlmClient.generate`, which returns an
:class:`LlmExchange` and, if an :class:`ExchangeLog` is attached, appends
the exchange to a JSONL file verbatim.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import threading
import time
from collections.abc import Iterable, Sequence
from dataclasses import asdict, dataclass
from pathlib import Path

import requests

log = logging.getLogger(__name__)

__all__ = [
    "BackendConfig",
    "BackendFailure",
    "ExchangeLog",
    "LlmClient",
    "LlmExchange",
    "MalformedBackendResponse",
    "ScriptExhausted",
    "Timeout",
    "TransportError",
    "generate",
    "resolve_base_url",
]

DEFAULT_BASE_URL = "http://localhost:11434"
BASE_URL_ENV_VARS = ("SOLCOT_BACKEND_URL", "OLLAMA_HOST")
KINDS = ("ollama", "mock", "scripted")


class BackendFailure(RuntimeError):
    """Base class for errors raised while talking to a backend."""


class TransportError(BackendFailure):
    pass


class Timeout(TransportError):
    pass


class MalformedBackendResponse(BackendFailure):
    pass


class ScriptExhausted(BackendFailure):
    pass


def resolve_base_url(explicit: str | None = None) -> str:
    """Pick the backend URL: explicit value, then environment, then the local default.

    ``OLLAMA_HOST`` may be given without a scheme (``host:port``), as the
    Ollama tools accept; ``http://`` is assumed in that case.
    """
    url = explicit
    if not url:
        for var in BASE_URL_ENV_VARS:
            if os.environ.get(var):
                url = os.environ[var]
                break
    url = url or DEFAULT_BASE_URL
    if "://" not in url:
        url = "http://" + url
    return url.rstrip("/")


@dataclass(frozen=True)
class BackendConfig:
    kind: str = "mock"
    base_url: str = DEFAULT_BASE_URL
    model_name: str = "deepseek-r1:14b"
    temperature: float = 0.0
    seed: int = 0
    timeout: float = 300.0
    max_retries: int = 3
    backoff: float = 1.0  # seconds before the first retry; doubles each time

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"backend kind must be one of {KINDS}, got {self.kind!r}")
        if not self.timeout > 0:
            raise ValueError(f"timeout must be > 0, got {self.timeout}")
        if self.temperature < 0:
            raise ValueError(f"temperature must be >= 0, got {self.temperature}")
        if self.max_retries < 0:
            raise ValueError(f"max_retries must be >= 0, got {self.max_retries}")

    def snapshot(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class LlmExchange:
    prompt: str
    response: str
    latency: float
    backend: dict
    role: str = ""


class ExchangeLog:
    """Append-only JSONL record of every exchange, one object per line."""

    def __init__(self, path: str | Path) -> None:
        self.path = Path(path)
        self._lock = threading.Lock()

    def append(self, exchange: LlmExchange) -> None:
        line = json.dumps(asdict(exchange), ensure_ascii=False, sort_keys=True)
        with self._lock, open(self.path, "a", encoding="utf-8") as fh:
            fh.write(line + "\n")

    def read(self) -> list[LlmExchange]:
        if not self.path.exists():
            return []
        with open(self.path, encoding="utf-8") as fh:
            return [LlmExchange(**json.loads(line)) for line in fh if line.strip()]


# ------------------------------------------------------------------ mock

_MOCK_ANALYSES = (
    "The prediction agrees closely with the reference trend; only a minor revision for the alkyl chain length is needed.",
    "The aromatic ring system and its substituents were under-weighted; a structure with this many rings is less soluble.",
    "The surrogate model underestimated the hydrogen-bonding contribution of the polar groups, so its value needs correction.",
    "Polar surface area and hydrogen-bond donors were given too little weight relative to LogP for this structure.",
    "The estimate overweighted molecular weight; the functional groups present keep solubility higher than the weight suggests.",
)
_ANCHOR_PATTERNS = (
    re.compile(r"GP mean:\s*([-+]?\d+(?:\.\d+)?)"),
    re.compile(r"similarity\s+[\d.]+,\s*logS\s*=\s*([-+]?\d+(?:\.\d+)?)"),
)
_EARLIER_ATTEMPT = re.compile(r"^- attempt \d+:", re.M)


def _unit_draws(prompt: str, seed: int, n: int) -> list[float]:
    digest = hashlib.sha256(f"{seed}\x00{prompt}".encode()).digest()
    return [int.from_bytes(digest[4 * k:4 * k + 4], "little") / 2**32 for k in range(n)]


def mock_response(prompt: str, seed: int) -> str:
    """Deterministic stand-in for a model, a pure function of ``(prompt, seed)``.

    Analysis prompts receive one of a few canned analyses. Prediction
    prompts receive ``PREDICTION: <v>`` where ``v`` is the GP mean or the
    nearest listed neighbour's value when the prompt contains one, shifted
    by a hash-derived offset in [-1.5, 1.5) that widens by a factor
    ``1 + k/2`` when the prompt lists ``k`` earlier rejected attempts;
    otherwise ``v`` is drawn uniformly from [-7, 1).
    """
    u = _unit_draws(prompt, seed, 3)
    if "ERROR ANALYSIS" in prompt:
        return _MOCK_ANALYSES[int(u[0] * len(_MOCK_ANALYSES))]
    anchor = None
    for pat in _ANCHOR_PATTERNS:
        m = pat.search(prompt)
        if m:
            anchor = float(m.group(1))
            break
    # each rejected attempt listed in the prompt widens the search around the anchor
    spread = 3.0 * (1 + 0.5 * len(_EARLIER_ATTEMPT.findall(prompt)))
    value = anchor + spread * (u[1] - 0.5) if anchor is not None else -7.0 + 8.0 * u[1]
    return f"Weighing the descriptors against the reference molecules.\nPREDICTION: {value:.2f}"


# ------------------------------------------------------------------ client


class _Script:
    def __init__(self, responses: Iterable[str]) -> None:
        self._responses = list(responses)
        self._next = 0
        self._lock = threading.Lock()

    def pop(self) -> str:
        with self._lock:
            if self._next >= len(self._responses):
                raise ScriptExhausted(f"scripted backend has only {len(self._responses)} responses")
            text = self._responses[self._next]
            self._next += 1
            return text

    @property
    def remaining(self) -> int:
        return len(self._responses) - self._next


class LlmClient:
    """Stateful front end to one backend configuration.

    Parameters
    ----------
    config
        Backend settings.
    script
        Responses replayed in order by ``kind="scripted"``. A callable
        ``script(prompt) -> str`` is also accepted, for tests that need to
        react to prompt content.
    exchange_log
        Optional log that receives every exchange.
    role
        Free-form label ("predictor", "analyzer") stored with each exchange.
    """

    def __init__(
        self,
        config: BackendConfig,
        script: Sequence[str] | None = None,
        exchange_log: ExchangeLog | None = None,
        role: str = "",
        session: requests.Session | None = None,
        sleep=time.sleep,
    ) -> None:
        self.config = config
        self.role = role
        self.exchange_log = exchange_log
        self.calls = 0
        self._session = session or requests.Session()
        self._sleep = sleep
        self._responder = None
        self._script = None
        if config.kind == "scripted":
            if script is None:
                raise ValueError("scripted backend needs a script")
            if callable(script):
                self._responder = script
            else:
                self._script = _Script(script)

    def with_role(self, role: str) -> "LlmClient":
        clone = LlmClient.__new__(LlmClient)
        clone.__dict__.update(self.__dict__)
        clone.role = role
        return clone

    def generate(self, prompt: str) -> LlmExchange:
        if not prompt:
            raise ValueError("prompt must be non-empty")
        start = time.perf_counter()
        kind = self.config.kind
        if kind == "mock":
            text = mock_response(prompt, self.config.seed)
        elif kind == "scripted":
            text = self._responder(prompt) if self._responder else self._script.pop()
        else:
            text = self._ollama(prompt)
        self.calls += 1
        exchange = LlmExchange(
            prompt=prompt,
            response=text,
            latency=time.perf_counter() - start,
            backend=self.config.snapshot(),
            role=self.role,
        )
        if self.exchange_log is not None:
            self.exchange_log.append(exchange)
        return exchange

    def _ollama(self, prompt: str) -> str:
        cfg = self.config
        url = f"{cfg.base_url.rstrip('/')}/api/generate"
        body = {
            "model": cfg.model_name,
            "prompt": prompt,
            "stream": False,
            "options": {"temperature": cfg.temperature, "seed": cfg.seed},
        }
        last_error: Exception | None = None
        for attempt in range(cfg.max_retries + 1):
            if attempt:
                delay = cfg.backoff * 2 ** (attempt - 1)
                log.warning("retrying %s in %.1fs (attempt %d): %s", url, delay, attempt + 1, last_error)
                self._sleep(delay)
            try:
                resp = self._session.post(url, json=body, timeout=cfg.timeout)
            except requests.Timeout as exc:
                last_error = Timeout(f"no response from {url} within {cfg.timeout}s")
                last_error.__cause__ = exc
                continue
            except requests.RequestException as exc:
                last_error = TransportError(f"cannot reach {url}: {exc.__class__.__name__}")
                last_error.__cause__ = exc
                continue
            if resp.status_code >= 500 or resp.status_code == 429:
                last_error = TransportError(f"{url} returned HTTP {resp.status_code}")
                continue
            if resp.status_code >= 400:
                raise MalformedBackendResponse(f"{url} returned HTTP {resp.status_code}: {resp.text[:200]}")
            try:
                payload = resp.json()
            except ValueError as exc:
                raise MalformedBackendResponse(f"{url} returned non-JSON body") from exc
            text = payload.get("response") if isinstance(payload, dict) else None
            if not isinstance(text, str):
                raise MalformedBackendResponse(f"{url} response lacks a string 'response' field")
            return text
        assert last_error is not None
        raise last_error


def generate(cfg: BackendConfig, prompt: str, script: Sequence[str] | None = None) -> LlmExchange:
    """One-shot convenience wrapper around :class:`LlmClient`."""
    return LlmClient(cfg, script=script).generate(prompt)
