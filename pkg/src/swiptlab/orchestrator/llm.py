"""Chat-completion agent adapter with retries and record/replay.

The adapter speaks the common JSON chat shape: a messages array of
role/content pairs, answered by choices[0].message.content. Transports
are injectable callables so tests can replay recorded exchanges without
touching the network.
"""

from __future__ import annotations

import json
import os
import re
import time
from pathlib import Path
from typing import Callable, Sequence

import requests

from ..constellation import parse_complex_array
from ..errors import ConfigError, ParseError, TransportError

__all__ = [
    "ENV_ENDPOINT",
    "ENV_MODEL",
    "ENV_API_KEY",
    "ChatEndpointAgent",
    "HttpTransport",
    "RecordingTransport",
    "ReplayTransport",
    "extract_array_text",
    "llm_agent",
]

ENV_ENDPOINT = "RTFV_LLM_ENDPOINT"
ENV_MODEL = "RTFV_LLM_MODEL"
ENV_API_KEY = "RTFV_LLM_API_KEY"

Transport = Callable[[dict], dict]


class HttpTransport:
    """POST the payload to a chat-completion endpoint."""

    def __init__(self, endpoint: str, api_key: str, timeout: float = 60.0):
        self.endpoint = endpoint
        self.api_key = api_key
        self.timeout = timeout

    def __call__(self, payload: dict) -> dict:
        try:
            response = requests.post(
                self.endpoint,
                json=payload,
                headers={"Authorization": f"Bearer {self.api_key}"},
                timeout=self.timeout,
            )
            response.raise_for_status()
            return response.json()
        except requests.RequestException as exc:
            raise TransportError(f"endpoint request failed: {exc}") from exc
        except ValueError as exc:
            raise TransportError(f"endpoint returned non-JSON: {exc}") from exc


class RecordingTransport:
    """Wrap a transport and capture request/response pairs verbatim."""

    def __init__(self, inner: Transport):
        self.inner = inner
        self.exchanges: list[dict] = []

    def __call__(self, payload: dict) -> dict:
        response = self.inner(payload)
        self.exchanges.append({"request": payload, "response": response})
        return response

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.exchanges, indent=2) + "\n")


class ReplayTransport:
    """Serve recorded exchanges in order, checking requests match."""

    def __init__(self, source: str | Path | list[dict]):
        if isinstance(source, (str, Path)):
            self.exchanges = json.loads(Path(source).read_text())
        else:
            self.exchanges = list(source)
        self._next = 0

    def __call__(self, payload: dict) -> dict:
        if self._next >= len(self.exchanges):
            raise TransportError("replay exhausted: no recorded exchange left")
        entry = self.exchanges[self._next]
        self._next += 1
        if entry["request"] != payload:
            raise TransportError(f"replay mismatch at exchange {self._next - 1}")
        return entry["response"]


_ARRAY_RE = re.compile(r"\[[^\[\]]*\]", re.S)


def extract_array_text(content: str) -> str:
    """Pull the first parseable complex-array literal out of reply text.

    Falls back to the raw content when nothing parses, so downstream
    validation can report a parse rejection with context.
    """
    for match in _ARRAY_RE.finditer(content):
        try:
            parse_complex_array(match.group(0))
        except ParseError:
            continue
        return match.group(0)
    return content


class ChatEndpointAgent:
    """Agent backed by a chat-completion endpoint.

    Sends the instruction set as the system message, prior exchanges as
    alternating user/assistant turns, and the current prompt last.
    Transport failures are retried with exponential backoff (3 attempts).
    """

    def __init__(
        self,
        model: str,
        transport: Transport,
        *,
        max_attempts: int = 3,
        backoff_base: float = 0.5,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.model = model
        self.transport = transport
        self.max_attempts = max_attempts
        self.backoff_base = backoff_base
        self._sleep = sleep

    @classmethod
    def from_env(
        cls,
        transport: Transport | None = None,
        *,
        environ: dict[str, str] | None = None,
        **kwargs,
    ) -> "ChatEndpointAgent":
        env = os.environ if environ is None else environ
        missing = [k for k in (ENV_ENDPOINT, ENV_MODEL, ENV_API_KEY) if not env.get(k)]
        if transport is not None:
            missing = [k for k in missing if k != ENV_ENDPOINT and k != ENV_API_KEY]
        if missing:
            raise ConfigError(
                "llm agent needs environment variables: " + ", ".join(missing)
            )
        if transport is None:
            transport = HttpTransport(env[ENV_ENDPOINT], env[ENV_API_KEY])
        return cls(env[ENV_MODEL], transport, **kwargs)

    def _request(self, payload: dict) -> dict:
        last: TransportError | None = None
        for attempt in range(self.max_attempts):
            try:
                return self.transport(payload)
            except TransportError as exc:
                last = exc
                if attempt + 1 < self.max_attempts:
                    self._sleep(self.backoff_base * 2**attempt)
        raise TransportError(f"transport failed after {self.max_attempts} attempts: {last}")

    def respond(
        self,
        instructions: str,
        prompt: str,
        history: Sequence[tuple[str, str]],
    ) -> str:
        messages = [{"role": "system", "content": instructions}]
        for past_prompt, past_reply in history:
            messages.append({"role": "user", "content": past_prompt})
            messages.append({"role": "assistant", "content": past_reply})
        messages.append({"role": "user", "content": prompt})
        response = self._request({"model": self.model, "messages": messages})
        try:
            content = response["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise TransportError(f"malformed chat response: {exc}") from exc
        return extract_array_text(str(content))


def llm_agent(
    transport: Transport | None = None,
    *,
    environ: dict[str, str] | None = None,
    **kwargs,
) -> ChatEndpointAgent:
    """Build the endpoint-backed agent from RTFV_LLM_* configuration."""
    return ChatEndpointAgent.from_env(transport, environ=environ, **kwargs)
