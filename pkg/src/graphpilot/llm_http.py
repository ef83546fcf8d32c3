"""Chat-completions HTTP backend for planning and annotation."""

from __future__ import annotations

import json
import logging
import os
import time
from dataclasses import dataclass

import httpx

from .errors import AuthError, ResponseParseError, TransportError
from .generator import SequenceGenerator

log = logging.getLogger(__name__)

API_KEY_ENV = "GRAPHPILOT_API_KEY"
DEFAULT_ENDPOINT = "https://api.openai.com/v1/chat/completions"
DEFAULT_MODEL = "gpt-4o"


@dataclass(frozen=True)
class HttpConfig:
    endpoint: str = DEFAULT_ENDPOINT
    model: str = DEFAULT_MODEL
    timeout: float = 60.0
    max_retries: int = 3
    backoff_base: float = 0.5
    backoff_cap: float = 8.0


class ChatClient:
    """Sends one user message per call. Each instance owns its own connection
    pool, so concurrent sessions should each build their own client."""

    def __init__(self, config: HttpConfig, api_key: str | None = None):
        self.config = config
        self.api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV)
        if not self.api_key:
            raise AuthError(f"set {API_KEY_ENV} to use the HTTP backend")
        self._http = httpx.Client(timeout=config.timeout)

    def close(self) -> None:
        self._http.close()

    def complete(self, prompt: str) -> str:
        cfg = self.config
        body = {"model": cfg.model, "messages": [{"role": "user", "content": prompt}]}
        headers = {"Authorization": f"Bearer {self.api_key}"}
        last: Exception | None = None
        for attempt in range(cfg.max_retries + 1):
            if attempt:
                delay = min(cfg.backoff_cap, cfg.backoff_base * 2 ** (attempt - 1))
                log.info("retrying chat request in %.2fs (attempt %d)", delay, attempt + 1)
                time.sleep(delay)
            try:
                resp = self._http.post(cfg.endpoint, json=body, headers=headers)
            except httpx.TransportError as e:
                last = e
                continue
            if resp.status_code in (401, 403):
                raise AuthError(f"endpoint rejected credentials ({resp.status_code})")
            if resp.status_code == 429 or resp.status_code >= 500:
                last = TransportError(f"HTTP {resp.status_code}")
                continue
            if resp.status_code >= 400:
                raise TransportError(f"HTTP {resp.status_code}: {resp.text[:200]}")
            return _content(resp.text)
        raise TransportError(f"gave up after {cfg.max_retries + 1} attempts: {last}")


def _content(raw: str) -> str:
    try:
        content = json.loads(raw)["choices"][0]["message"]["content"]
    except (json.JSONDecodeError, KeyError, IndexError, TypeError) as e:
        raise ResponseParseError(1, f"not a chat-completions response: {e}") from e
    if not isinstance(content, str):
        raise ResponseParseError(1, "message content is not text")
    return content


class HttpGenerator(SequenceGenerator):
    """Meters wall-clock time; retries inside one call count as one query."""

    simulated = False

    def __init__(self, client: ChatClient):
        super().__init__()
        self.client = client

    def _respond(self, prompt):
        return self.client.complete(prompt)


def http_generate(config: HttpConfig, prompt: str, api_key: str | None = None):
    gen = HttpGenerator(ChatClient(config, api_key))
    try:
        return gen.generate(prompt)
    finally:
        gen.client.close()


class HttpAnnotator:
    def __init__(self, client: ChatClient):
        self.client = client

    def describe_page(self, html_prev, action_prev, html_curr, action_curr, html_next):
        lines = ["Describe in one sentence the function of the app page shown as CURRENT."]
        if html_prev is not None:
            lines += [f"PREVIOUS: {html_prev.canonical_text}", f"ACTION TAKEN: {action_prev.to_json()}"]
        lines += [f"CURRENT: {html_curr.canonical_text}", f"NEXT ACTION: {action_curr.to_json()}",
                  f"RESULT: {html_next.canonical_text}"]
        return self.client.complete("\n".join(lines)).strip()

    def describe_element(self, html_curr, action_curr, html_next):
        prompt = "\n".join([
            "Describe in one sentence what the element targeted by ACTION does.",
            f"PAGE: {html_curr.canonical_text}",
            f"ACTION: {action_curr.to_json()}",
            f"RESULT: {html_next.canonical_text}",
        ])
        return self.client.complete(prompt).strip()
