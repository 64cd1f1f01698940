"""HTTP session service: create a clarification session from a fixture
instance, answer questions turn by turn, inspect scoring, delete sessions.

Every response body is an envelope {status: OK|ERROR, payload | error}.
Answers are idempotency-checked by turn index: replaying an identical
(session, turn, answer) triple returns the stored outcome; a different answer
for an already-processed turn is a 409 conflict.
"""

from __future__ import annotations

import threading
import time
import uuid
from typing import Any

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .candidates import entropy
from .errors import (
    FormatError,
    InconsistentAnswer,
    SqlClarifyError,
    ValidationError,
)
from .fixtures import FixtureInstance, instance_distribution, load_bundled, load_fixtures
from .questions import Answer
from .scoring import SelectionStrategy, StrategyKind, score_all
from .session import (
    InteractionMode,
    SessionConfig,
    SessionState,
    SessionStatus,
    apply_answer,
    step,
)
from .variables import extract_decision_variables

DEFAULT_IDLE_SECONDS = 3600.0

STRATEGY_ALIASES = {
    "random": StrategyKind.RANDOM,
    "maxprob": StrategyKind.MAX_PROBABILITY,
    "minprob": StrategyKind.MIN_PROBABILITY,
    "ig": StrategyKind.INFO_GAIN_UNIFORM,
    "eig": StrategyKind.EXPECTED_INFO_GAIN,
}

MODE_ALIASES = {
    "single": InteractionMode.SINGLE_TURN,
    "multi": InteractionMode.MULTI_TURN,
}


def ok(payload: Any) -> dict:
    return {"status": "OK", "payload": payload}


def error_body(code: str, message: str) -> dict:
    return {"status": "ERROR", "error": {"code": code, "message": message}}


class ApiError(Exception):
    def __init__(self, http_status: int, code: str, message: str):
        super().__init__(message)
        self.http_status = http_status
        self.code = code
        self.message = message

    def response(self) -> JSONResponse:
        return JSONResponse(
            status_code=self.http_status, content=error_body(self.code, self.message)
        )


class SessionRecord:
    def __init__(self, state: SessionState):
        self.session_id = uuid.uuid4().hex
        self.state = state
        self.lock = threading.Lock()
        self.last_access = time.monotonic()
        # turn index -> (answer triple, response body, http status)
        self.turn_log: dict[int, tuple[tuple[str, str], dict, int]] = {}

    def touch(self) -> None:
        self.last_access = time.monotonic()


class SessionStore:
    def __init__(self, idle_seconds: float = DEFAULT_IDLE_SECONDS):
        self.idle_seconds = idle_seconds
        self._records: dict[str, SessionRecord] = {}
        self._lock = threading.Lock()

    def _purge(self) -> None:
        cutoff = time.monotonic() - self.idle_seconds
        stale = [sid for sid, rec in self._records.items() if rec.last_access < cutoff]
        for sid in stale:
            del self._records[sid]

    def add(self, record: SessionRecord) -> None:
        with self._lock:
            self._purge()
            self._records[record.session_id] = record

    def get(self, session_id: str) -> SessionRecord:
        with self._lock:
            self._purge()
            record = self._records.get(session_id)
        if record is None:
            raise ApiError(404, "unknown_session", f"no session {session_id!r}")
        record.touch()
        return record

    def delete(self, session_id: str) -> None:
        with self._lock:
            if session_id not in self._records:
                raise ApiError(404, "unknown_session", f"no session {session_id!r}")
            del self._records[session_id]


def _parse_config(raw: Any, default_seed: int) -> SessionConfig:
    raw = raw or {}
    if not isinstance(raw, dict):
        raise ApiError(400, "malformed_body", "config must be an object")
    strategy_name = str(raw.get("strategy", "eig")).lower()
    if strategy_name not in STRATEGY_ALIASES:
        raise ApiError(
            400,
            "malformed_body",
            f"unknown strategy {strategy_name!r}; expected one of {sorted(STRATEGY_ALIASES)}",
        )
    mode_name = str(raw.get("mode", "multi")).lower()
    if mode_name not in MODE_ALIASES:
        raise ApiError(400, "malformed_body", "mode must be 'single' or 'multi'")
    try:
        return SessionConfig(
            strategy=SelectionStrategy(
                kind=STRATEGY_ALIASES[strategy_name],
                seed=raw.get("seed", default_seed),
            ),
            confidence_threshold=float(raw.get("tau", 0.9)),
            max_turns=int(raw.get("max_turns", 5)),
            mode=MODE_ALIASES[mode_name],
        )
    except (TypeError, ValueError) as exc:
        raise ApiError(400, "malformed_body", f"bad config: {exc}")


def session_payload(record: SessionRecord) -> dict:
    state = record.state
    dist = state.current
    pending = state.pending_question
    payload: dict[str, Any] = {
        "session_id": record.session_id,
        "status": state.status.value,
        "question": dist.question,
        "turn": state.turns_used,
        "candidates": [
            {
                "id": c.id,
                "sql": c.sql_text,
                "probability": c.probability,
                "rank": rank + 1,
            }
            for rank, c in enumerate(dist)
        ],
        "entropy": entropy(dist),
        "entropy_trace": list(state.transcript.entropy_trace),
        "pending_question": None,
        "final": None,
        "transcript": state.transcript.to_dict(),
    }
    if pending is not None:
        payload["pending_question"] = {
            "variable_id": pending.variable_id,
            "text": pending.text,
            "options": [
                {"value": value, "display": display} for value, display in pending.options
            ],
        }
    if state.status == SessionStatus.FINISHED:
        payload["final"] = {
            "sql": state.final.sql_text,
            "candidate_id": state.final.id,
            "stop_reason": state.stop_reason.value,
        }
    if state.status == SessionStatus.FAILED:
        payload["failure_reason"] = state.failure_reason
    return payload


def explain_payload(record: SessionRecord) -> dict:
    state = record.state
    dist = state.current
    variables = extract_decision_variables(dist)
    scores = score_all(dist, variables)
    selected = (
        state.pending_question.variable_id if state.pending_question else None
    )
    return {
        "session_id": record.session_id,
        "entropy": entropy(dist),
        "selected_variable": selected,
        "rows": [
            {
                "variable_id": s.variable_id,
                "marginal": s.marginal,
                "conditional_entropy": s.conditional_entropy,
                "eig": s.eig,
                "fast_path_eig": s.fast_path_eig,
                "selected": s.variable_id == selected,
            }
            for s in scores
        ],
        "note": "no decision variables" if not scores else None,
    }


def create_app(
    fixture_path: str | None = None,
    instances: list[FixtureInstance] | None = None,
    idle_seconds: float = DEFAULT_IDLE_SECONDS,
    default_seed: int = 0,
) -> FastAPI:
    """Build the service over a fixture corpus (bundled data by default)."""
    if instances is None:
        if fixture_path is not None:
            instances = load_fixtures(fixture_path)
        else:
            instances = load_bundled("fig3.json") + load_bundled("corpus.json")
    by_id = {inst.instance_id: inst for inst in instances}

    app = FastAPI(title="sqlclarify", docs_url=None, redoc_url=None)
    store = SessionStore(idle_seconds=idle_seconds)
    app.state.store = store
    app.state.instances = by_id

    @app.exception_handler(ApiError)
    async def handle_api_error(_request: Request, exc: ApiError):
        return exc.response()

    @app.exception_handler(RequestValidationError)
    async def handle_validation(_request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400, content=error_body("malformed_body", str(exc))
        )

    @app.exception_handler(SqlClarifyError)
    async def handle_domain_error(_request: Request, exc: SqlClarifyError):
        return JSONResponse(
            status_code=400, content=error_body(type(exc).__name__, str(exc))
        )

    @app.get("/v1/instances")
    def list_instances():
        return ok(
            [
                {
                    "instance_id": inst.instance_id,
                    "question": inst.question,
                    "candidates": len(inst.candidates),
                    "difficulty": inst.difficulty,
                }
                for inst in instances
            ]
        )

    @app.post("/v1/sessions")
    async def create_session(request: Request):
        try:
            body = await request.json()
        except Exception:
            raise ApiError(400, "malformed_body", "request body must be JSON")
        if not isinstance(body, dict):
            raise ApiError(400, "malformed_body", "request body must be an object")
        instance_id = body.get("instance_id")
        if instance_id is None and len(by_id) == 1:
            instance_id = next(iter(by_id))
        if instance_id not in by_id:
            raise ApiError(
                400, "unknown_instance", f"unknown instance_id {instance_id!r}"
            )
        config = _parse_config(body.get("config"), default_seed)
        try:
            dist = instance_distribution(by_id[instance_id])
        except (FormatError, ValidationError, SqlClarifyError) as exc:
            raise ApiError(400, "bad_instance", str(exc))
        state = SessionState(config=config, distribution=dist)
        step(state)
        record = SessionRecord(state)
        store.add(record)
        return ok(session_payload(record))

    @app.get("/v1/sessions/{session_id}")
    def get_session(session_id: str):
        record = store.get(session_id)
        with record.lock:
            return ok(session_payload(record))

    @app.delete("/v1/sessions/{session_id}")
    def delete_session(session_id: str):
        store.get(session_id)
        store.delete(session_id)
        return ok({"deleted": session_id})

    @app.post("/v1/sessions/{session_id}/answer")
    async def post_answer(session_id: str, request: Request):
        try:
            body = await request.json()
        except Exception:
            raise ApiError(400, "malformed_body", "request body must be JSON")
        if not isinstance(body, dict):
            raise ApiError(400, "malformed_body", "request body must be an object")
        for fieldname in ("turn", "variable_id", "chosen"):
            if fieldname not in body:
                raise ApiError(400, "malformed_body", f"missing field {fieldname!r}")
        try:
            turn = int(body["turn"])
        except (TypeError, ValueError):
            raise ApiError(400, "malformed_body", "turn must be an integer")
        variable_id = str(body["variable_id"])
        chosen = str(body["chosen"])

        record = store.get(session_id)
        with record.lock:
            state = record.state
            if turn in record.turn_log:
                stored_triple, stored_body, stored_status = record.turn_log[turn]
                if stored_triple == (variable_id, chosen):
                    return JSONResponse(status_code=stored_status, content=stored_body)
                raise ApiError(
                    409,
                    "turn_conflict",
                    f"turn {turn} already answered with a different option",
                )
            if state.status == SessionStatus.FINISHED:
                raise ApiError(409, "finished", "session already finished")
            if state.status == SessionStatus.FAILED:
                raise ApiError(409, "failed", "session already failed")
            if turn != state.turns_used:
                raise ApiError(
                    409,
                    "turn_conflict",
                    f"expected turn {state.turns_used}, got {turn}",
                )
            try:
                apply_answer(state, Answer(variable_id=variable_id, chosen=chosen))
            except ValidationError as exc:
                raise ApiError(400, "malformed_body", str(exc))
            except InconsistentAnswer as exc:
                body_out = error_body("inconsistent_answer", str(exc))
                body_out["payload"] = session_payload(record)
                record.turn_log[turn] = ((variable_id, chosen), body_out, 422)
                return JSONResponse(status_code=422, content=body_out)
            step(state)
            response_body = ok(session_payload(record))
            record.turn_log[turn] = ((variable_id, chosen), response_body, 200)
            return response_body

    @app.get("/v1/sessions/{session_id}/explain")
    def explain(session_id: str):
        record = store.get(session_id)
        with record.lock:
            return ok(explain_payload(record))

    return app
