"""LLM transport: live HTTP, replay from transcripts, and recording.

Requests are keyed by a digest of (model, messages, temperature); replay mode
answers from a transcript by digest and never touches the network, which makes
the whole induce -> execute pipeline bit-deterministic.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ClientError, ReplayMissError

ENV_BASE_URL = "ARRANGEKIT_LLM_BASE_URL"
ENV_API_KEY = "ARRANGEKIT_LLM_API_KEY"
ENV_MODEL = "ARRANGEKIT_LLM_MODEL"


@dataclass(frozen=True)
class ChatRequest:
    messages: tuple[tuple[str, str], ...]  # (role, content) pairs
    model: str = "default"
    temperature: float = 0.0

    @staticmethod
    def user(content: str, model: str = "default", system: str | None = None) -> "ChatRequest":
        messages = []
        if system:
            messages.append(("system", system))
        messages.append(("user", content))
        return ChatRequest(messages=tuple(messages), model=model)


def request_digest(request: ChatRequest) -> str:
    canon = json.dumps(
        {
            "model": request.model,
            "temperature": request.temperature,
            "messages": [[role, content] for role, content in request.messages],
        },
        sort_keys=True,
        ensure_ascii=False,
    )
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


@dataclass
class Transcript:
    entries: list[dict] = field(default_factory=list)
    _index: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        for e in self.entries:
            self._index[e["digest"]] = e["response"]

    def __len__(self) -> int:
        return len(self.entries)

    def lookup(self, digest: str) -> str | None:
        return self._index.get(digest)

    def append(self, request: ChatRequest, response: str) -> None:
        digest = request_digest(request)
        if digest in self._index:
            return
        entry = {
            "digest": digest,
            "request": {
                "model": request.model,
                "temperature": request.temperature,
                "messages": [[role, content] for role, content in request.messages],
            },
            "response": response,
        }
        self.entries.append(entry)
        self._index[digest] = response

    @staticmethod
    def load(path) -> "Transcript":
        entries = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    entries.append(json.loads(line))
        return Transcript(entries=entries)

    def save(self, path) -> None:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as fh:
            for e in self.entries:
                fh.write(json.dumps(e, ensure_ascii=False, sort_keys=True) + "\n")


class ReplayClient:
    """Answers requests from a transcript by digest; replay-miss is an error."""

    def __init__(self, transcript: Transcript, model: str | None = None):
        self.transcript = transcript
        if model is None:
            # adopt the recorded model so digests line up
            model = transcript.entries[0]["request"]["model"] if transcript.entries else "default"
        self.model = model

    def complete(self, request: ChatRequest) -> str:
        digest = request_digest(request)
        response = self.transcript.lookup(digest)
        if response is None:
            preview = request.messages[-1][1][:120].replace("\n", " ")
            raise ReplayMissError(f"no transcript entry for digest {digest[:12]}... ({preview!r})")
        return response


class RecordingClient:
    """Wraps another client, appending every exchange to a transcript."""

    def __init__(self, inner, transcript: Transcript | None = None, autosave_path=None):
        self.inner = inner
        self.transcript = transcript if transcript is not None else Transcript()
        self.autosave_path = autosave_path

    @property
    def model(self) -> str:
        return self.inner.model

    def complete(self, request: ChatRequest) -> str:
        response = self.inner.complete(request)
        self.transcript.append(request, response)
        if self.autosave_path:
            self.transcript.save(self.autosave_path)
        return response


class LiveClient:
    """Chat-completions over HTTP; endpoint and credential from the environment."""

    def __init__(self, base_url: str | None = None, api_key: str | None = None, model: str | None = None, timeout: float = 120.0):
        self.base_url = (base_url or os.environ.get(ENV_BASE_URL, "")).rstrip("/")
        self.api_key = api_key or os.environ.get(ENV_API_KEY, "")
        self.model = model or os.environ.get(ENV_MODEL, "gpt-4")
        self.timeout = timeout
        if not self.base_url:
            raise ClientError(f"no LLM endpoint configured (set {ENV_BASE_URL})")
        if not self.api_key:
            raise ClientError(f"no LLM credential configured (set {ENV_API_KEY})")

    def complete(self, request: ChatRequest) -> str:
        import requests

        payload = {
            "model": request.model if request.model != "default" else self.model,
            "temperature": request.temperature,
            "messages": [{"role": role, "content": content} for role, content in request.messages],
        }
        try:
            resp = requests.post(
                f"{self.base_url}/chat/completions",
                json=payload,
                headers={"Authorization": f"Bearer {self.api_key}"},
                timeout=self.timeout,
            )
            resp.raise_for_status()
            doc = resp.json()
            return doc["choices"][0]["message"]["content"]
        except ClientError:
            raise
        except Exception as exc:  # network, HTTP, schema
            raise ClientError(f"chat completion failed: {exc}") from exc
