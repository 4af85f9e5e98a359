"""Free-form answer conversion through a judge model.

Model outputs arrive as arbitrary prose. A judge pass turns each one into
either a value from the question's answer domain or Indefinite. Transports
abstract where the judge lives: a real HTTP endpoint, a directory of
recorded fixtures for offline replay, or a recorder that captures fixtures
while delegating to a live transport. Malformed judge replies get exactly
one re-ask before the answer is marked Indefinite; transport failures are
a different condition and always raise.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
from typing import Protocol

import httpx

from .model import CaptionObject, JudgedAnswer, QARecord, SceneCaption, Value
from .scoring import normalize_value
from .serialize import atomic_write_text

log = logging.getLogger(__name__)


class TransportError(Exception):
    """The judge could not be reached or replied out of protocol."""


class Transport(Protocol):
    def complete(self, prompt: str) -> str: ...


def fixture_key(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()[:16]


class ReplayTransport:
    """Serves judge replies from recorded fixture files, keyed by prompt hash."""

    def __init__(self, fixtures_dir: str):
        self.fixtures_dir = fixtures_dir

    def complete(self, prompt: str) -> str:
        path = os.path.join(self.fixtures_dir, f"{fixture_key(prompt)}.txt")
        try:
            with open(path, encoding="utf-8") as fh:
                return fh.read()
        except OSError as exc:
            raise TransportError(f"no fixture for prompt ({path})") from exc


class RecordingTransport:
    """Delegates to a live transport and records every reply as a fixture."""

    def __init__(self, inner: Transport, fixtures_dir: str):
        self.inner = inner
        self.fixtures_dir = fixtures_dir
        os.makedirs(fixtures_dir, exist_ok=True)

    def complete(self, prompt: str) -> str:
        reply = self.inner.complete(prompt)
        atomic_write_text(
            os.path.join(self.fixtures_dir, f"{fixture_key(prompt)}.txt"), reply)
        return reply


class HttpTransport:
    """Minimal JSON-over-HTTP judge client.

    Protocol: POST {"model": ..., "prompt": ...} and expect a 200 response
    whose JSON body carries the reply under "text".
    """

    def __init__(self, url: str, model: str = "judge-v1",
                 api_key: str | None = None, timeout: float = 30.0,
                 client: httpx.Client | None = None):
        headers = {}
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        self.url = url
        self.model = model
        self.client = client or httpx.Client(timeout=timeout, headers=headers)

    def complete(self, prompt: str) -> str:
        try:
            response = self.client.post(
                self.url, json={"model": self.model, "prompt": prompt})
        except httpx.HTTPError as exc:
            raise TransportError(f"judge request failed: {exc}") from exc
        if response.status_code != 200:
            raise TransportError(f"judge returned HTTP {response.status_code}")
        try:
            return response.json()["text"]
        except (KeyError, ValueError) as exc:
            raise TransportError("judge reply missing 'text' field") from exc


_KIND_HINTS = {
    "yes_no": "true or false",
    "integer": "an integer",
    "attribute": "a single lowercase attribute word",
}

VQA_PROMPT_V1 = """\
Convert a model's free-form answer to a structured value.

Question: {question}
The answer must be {hint}.
Model answer: {raw}

Reply with exactly one JSON object of the form {{"value": ...}} where the
value is {hint}, or {{"value": null}} if the model answer does not commit
to one. No other text."""

CAPTION_PROMPT_V1 = """\
Convert a model's free-form scene description into structured form.

Description: {raw}

Reply with exactly one JSON object {{"objects": [...]}} where each entry is
{{"attributes": {{...}}, "cycles": [...]}}. Attribute keys may be shape,
color, size, material; cycles is a list drawn from linear_motion, orbit,
size_change, color_change, orientation_change. No other text."""

REASK_SUFFIX = ("\n\nYour previous reply was not a single valid JSON object. "
                "Reply again with exactly one JSON object and nothing else.")


def _ask_json(transport: Transport, prompt: str) -> dict | None:
    """One judge call plus at most one re-ask; None when both replies are
    malformed."""
    for attempt, text in enumerate((prompt, prompt + REASK_SUFFIX)):
        reply = transport.complete(text)
        try:
            data = json.loads(reply.strip())
        except ValueError:
            if attempt == 0:
                log.warning("malformed judge reply, re-asking once")
            continue
        if isinstance(data, dict):
            return data
    log.warning("judge reply stayed malformed after re-ask")
    return None


def judge_vqa_answer(record: QARecord, raw: str | None,
                     transport: Transport) -> JudgedAnswer:
    """Judge one free-form answer into the record's answer domain."""
    if raw is None:
        return JudgedAnswer(record.question_id, None)
    prompt = VQA_PROMPT_V1.format(question=record.question,
                                  hint=_KIND_HINTS[record.answer_kind],
                                  raw=raw)
    data = _ask_json(transport, prompt)
    if data is None or "value" not in data:
        return JudgedAnswer(record.question_id, None)
    normalized = normalize_value(data["value"], record.answer_kind)
    if normalized is None:
        return JudgedAnswer(record.question_id, None)
    if record.answer_kind == "yes_no":
        return JudgedAnswer(record.question_id, Value.boolean(bool(normalized)))
    if record.answer_kind == "integer":
        return JudgedAnswer(record.question_id, Value.integer(int(normalized)))
    return JudgedAnswer(record.question_id, Value.attr(str(normalized)))


def judge_vqa(records: list[QARecord], raw_answers: dict[str, str],
              transport: Transport) -> list[JudgedAnswer]:
    return [judge_vqa_answer(r, raw_answers.get(r.question_id), transport)
            for r in records]


def judge_caption(scene_id: str, raw: str, transport: Transport) -> SceneCaption:
    """Judge one free-form caption into structured objects; malformed judge
    output after the re-ask degrades to an empty caption."""
    data = _ask_json(transport, CAPTION_PROMPT_V1.format(raw=raw))
    if data is None or not isinstance(data.get("objects"), list):
        return SceneCaption(scene_id=scene_id, objects=())
    objects = []
    for entry in data["objects"]:
        if not isinstance(entry, dict):
            continue
        attributes = entry.get("attributes")
        cycles = entry.get("cycles", [])
        if not isinstance(attributes, dict) or not isinstance(cycles, list):
            continue
        attrs = {str(k): str(v).strip().lower() for k, v in attributes.items()}
        objects.append(CaptionObject(
            attributes=attrs,
            cycles=tuple(str(c).strip().lower() for c in cycles)))
    return SceneCaption(scene_id=scene_id, objects=tuple(objects))
