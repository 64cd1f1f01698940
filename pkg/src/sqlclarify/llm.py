"""Optional HTTP adapter that sources candidates from a chat-completions
endpoint. Nothing else in the package performs network activity; evaluation
and tests run fully offline on fixtures.

Weights come from the model's self-reported per-candidate confidences when
present; otherwise they are estimated by frequency over k independent samples.
Requests and responses can be recorded to a JSONL file and replayed offline.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

import requests

from .errors import BackendProtocolError, BackendUnavailable
from .fixtures import SchemaDef

_SYSTEM_PROMPT = (
    "You translate natural-language questions into SQL for the given schema. "
    "Reply with a JSON array of objects, each {\"sql\": string, "
    "\"confidence\": number}, listing plausible distinct interpretations."
)


def _schema_text(schema: SchemaDef | None) -> str:
    if schema is None:
        return "(no schema provided)"
    lines = []
    for table in schema.tables:
        cols = ", ".join(f"{c.name} {c.type}" for c in table.columns)
        lines.append(f"table {table.name} ({cols})")
        for left, right in table.foreign_keys:
            lines.append(f"  foreign key {left} -> {right}")
    return "\n".join(lines)


def _parse_content(content: str) -> list[tuple[str, float | None]]:
    """Extract (sql, confidence-or-None) pairs from a model reply."""
    text = content.strip()
    if text.startswith("```"):
        text = text.strip("`")
        if text.startswith("json"):
            text = text[4:]
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise BackendProtocolError(f"model reply is not JSON: {exc}")
    if isinstance(data, dict):
        data = [data]
    if not isinstance(data, list):
        raise BackendProtocolError("model reply must be a JSON array")
    pairs: list[tuple[str, float | None]] = []
    for item in data:
        if not isinstance(item, dict) or "sql" not in item:
            raise BackendProtocolError(f"candidate entry missing 'sql': {item!r}")
        confidence = item.get("confidence")
        pairs.append((item["sql"], None if confidence is None else float(confidence)))
    return pairs


class LlmBackend:
    """GenerationBackend over a chat-completions-style HTTP endpoint."""

    def __init__(
        self,
        endpoint: str,
        model_name: str,
        api_key_env: str = "LLM_API_KEY",
        frequency_samples: int = 20,
        timeout: float = 60.0,
        record_path: str | Path | None = None,
    ):
        self.endpoint = endpoint
        self.model_name = model_name
        self.api_key_env = api_key_env
        self.frequency_samples = frequency_samples
        self.timeout = timeout
        self.record_path = Path(record_path) if record_path else None
        self.last_mode: str | None = None

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.api_key_env)
        if key:
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def _record(self, request_body: dict, response_body: dict) -> None:
        if self.record_path is None:
            return
        with self.record_path.open("a", encoding="utf-8") as handle:
            handle.write(
                json.dumps({"request": request_body, "response": response_body}) + "\n"
            )

    def _chat(self, messages: list[dict], n: int, temperature: float) -> str:
        body = {
            "model": self.model_name,
            "messages": messages,
            "n": 1,
            "temperature": temperature,
        }
        try:
            response = requests.post(
                self.endpoint, json=body, headers=self._headers(), timeout=self.timeout
            )
        except requests.RequestException as exc:
            raise BackendUnavailable(f"endpoint unreachable: {exc}")
        if response.status_code >= 500:
            raise BackendUnavailable(f"endpoint returned {response.status_code}")
        if response.status_code >= 400:
            raise BackendProtocolError(
                f"endpoint rejected the request: {response.status_code} {response.text[:200]}"
            )
        try:
            payload = response.json()
            content = payload["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise BackendProtocolError(f"malformed chat response: {exc}") from exc
        self._record(body, payload)
        return content

    def generate(self, question: str, schema: SchemaDef | None, n: int):
        messages = [
            {"role": "system", "content": _SYSTEM_PROMPT},
            {
                "role": "user",
                "content": (
                    f"Schema:\n{_schema_text(schema)}\n\nQuestion: {question}\n"
                    f"Return up to {n} candidate SQL queries."
                ),
            },
        ]
        pairs = _parse_content(self._chat(messages, n=n, temperature=0.2))[:n]
        if pairs and all(conf is not None for _, conf in pairs):
            self.last_mode = "self_reported"
            return [(sql, float(conf)) for sql, conf in pairs]
        # confidences absent: estimate by frequency over independent samples
        self.last_mode = "frequency"
        counts: dict[str, int] = {}
        order: list[str] = []
        for _ in range(self.frequency_samples):
            sampled = _parse_content(self._chat(messages, n=1, temperature=1.0))
            if not sampled:
                continue
            sql = sampled[0][0]
            if sql not in counts:
                order.append(sql)
            counts[sql] = counts.get(sql, 0) + 1
        if not counts:
            raise BackendProtocolError("no candidates produced by sampling")
        total = sum(counts.values())
        return [(sql, counts[sql] / total) for sql in order][:n]


def llm_adapter(
    endpoint: str,
    model_name: str,
    api_key_env: str = "LLM_API_KEY",
    **kwargs,
) -> LlmBackend:
    return LlmBackend(endpoint, model_name, api_key_env=api_key_env, **kwargs)


class ReplayBackend:
    """Replays a recorded JSONL transcript instead of calling the network."""

    last_mode = "replay"

    def __init__(self, record_path: str | Path):
        self.records = [
            json.loads(line)
            for line in Path(record_path).read_text(encoding="utf-8").splitlines()
            if line.strip()
        ]
        if not self.records:
            raise BackendUnavailable(f"no recorded responses in {record_path}")
        self._cursor = 0

    def generate(self, question: str, schema: SchemaDef | None, n: int):
        record = self.records[min(self._cursor, len(self.records) - 1)]
        self._cursor += 1
        content = record["response"]["choices"][0]["message"]["content"]
        pairs = _parse_content(content)[:n]
        return [(sql, 1.0 if conf is None else float(conf)) for sql, conf in pairs]
