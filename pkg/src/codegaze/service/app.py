"""HTTP study service: task assignment, event ingestion, session submission.

State lives in the EventStore; the in-memory registry is rebuilt from disk at
startup, so a restart after a crash resumes with every acked event intact.
Handlers are sync (FastAPI runs them in a threadpool); one lock per live
session serializes its batches, a registry lock serializes registrations and
session creation.
"""

from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware

from ..corpus import load_corpus
from ..sessions import (
    EditOutsideBuggyLine,
    EventValidator,
    MalformedLog,
    SessionRecord,
    event_from_doc,
    event_to_doc,
    session_to_doc,
    VALIDITY_EXTERNAL,
    VALIDITY_VALID,
)
from ..tokens import Snippet
from .assignment import CorpusExhausted, assign_tasks
from .schemas import (
    EventBatchRequest,
    EventBatchResponse,
    OpenSessionRequest,
    OpenSessionResponse,
    RegisterRequest,
    RegisterResponse,
    SessionStatusResponse,
    SubmitRequest,
    SubmitResponse,
    TaskDoc,
    TaskListResponse,
)

API_PREFIX = "/api/v1"


@dataclass
class StudyConfig:
    corpus_path: str | Path
    storage_dir: str | Path
    tasks_per_participant: int = 4
    seed: int = 0
    host: str = "127.0.0.1"
    port: int = 8077
    session_minutes: int = 15


@dataclass
class LiveSession:
    token: str
    participant_id: str
    snippet_id: str
    validator: EventValidator
    closed: bool = False
    record_doc: dict | None = None
    lock: threading.Lock = field(default_factory=threading.Lock)


def _error(status: int, name: str, message: str) -> HTTPException:
    return HTTPException(status_code=status, detail={"error": name, "message": message})


class StudyState:
    def __init__(self, config: StudyConfig) -> None:
        from .storage import EventStore

        self.config = config
        self.corpus: dict[str, Snippet] = load_corpus(config.corpus_path)
        if not 1 <= config.tasks_per_participant <= len(self.corpus):
            raise ValueError(
                f"tasks_per_participant={config.tasks_per_participant} not in "
                f"1..{len(self.corpus)} (corpus size)"
            )
        self.store = EventStore(config.storage_dir)
        self.registry_lock = threading.Lock()
        self.participants: dict[str, list[str]] = self.store.load_participants()
        self.coverage: dict[str, int] = {sid: 0 for sid in self.corpus}
        for tasks in self.participants.values():
            for sid in tasks:
                self.coverage[sid] = self.coverage.get(sid, 0) + 1
        self.sessions: dict[str, LiveSession] = {}
        self.pair_to_token: dict[tuple[str, str], str] = {}
        self._recover()

    def _recover(self) -> None:
        for meta in self.store.load_metas():
            token = meta["token"]
            snippet = self.corpus.get(meta["snippet_id"])
            if snippet is None:
                raise ValueError(
                    f"stored session {token} references snippet {meta['snippet_id']!r} "
                    f"missing from the corpus"
                )
            validator = EventValidator(snippet)
            for doc in self.store.load_events(token):
                validator.check(event_from_doc(doc))
            live = LiveSession(
                token=token,
                participant_id=meta["participant_id"],
                snippet_id=meta["snippet_id"],
                validator=validator,
                closed=meta["status"] == "closed",
            )
            if live.closed:
                record_path = self.store.records_dir / f"{token}.json"
                if record_path.exists():
                    import json

                    live.record_doc = json.loads(record_path.read_text(encoding="utf-8"))
            self.sessions[token] = live
            self.pair_to_token[(live.participant_id, live.snippet_id)] = token

    def session_or_404(self, token: str) -> LiveSession:
        live = self.sessions.get(token)
        if live is None:
            raise _error(404, "StaleSession", f"no session with token {token!r}")
        return live


def create_app(config: StudyConfig) -> FastAPI:
    state = StudyState(config)
    app = FastAPI(title="codegaze study service", version="1")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.study = state

    @app.get(API_PREFIX + "/health")
    def health() -> dict:
        return {"status": "ok", "snippets": len(state.corpus)}

    @app.post(API_PREFIX + "/participants", response_model=RegisterResponse)
    def register(req: RegisterRequest) -> RegisterResponse:
        with state.registry_lock:
            tasks = state.participants.get(req.participant_id)
            if tasks is None:
                try:
                    tasks = assign_tasks(
                        req.participant_id,
                        sorted(state.corpus),
                        state.coverage,
                        state.config.tasks_per_participant,
                        state.config.seed,
                    )
                except CorpusExhausted as exc:
                    raise _error(409, "CorpusExhausted", str(exc)) from exc
                for sid in tasks:
                    state.coverage[sid] = state.coverage.get(sid, 0) + 1
                state.store.append_participant(req.participant_id, tasks)
                state.participants[req.participant_id] = tasks
        return RegisterResponse(participant_id=req.participant_id, tasks=tasks)

    def _task_doc(snippet: Snippet) -> TaskDoc:
        return TaskDoc(
            snippet_id=snippet.snippet_id,
            source=snippet.source,
            buggy_line=snippet.buggy_line,
            description=snippet.description,
            token_count=len(snippet.tokens),
            session_minutes=state.config.session_minutes,
        )

    @app.get(API_PREFIX + "/tasks/{participant_id}", response_model=TaskListResponse)
    def tasks(participant_id: str) -> TaskListResponse:
        assigned = state.participants.get(participant_id)
        if assigned is None:
            raise _error(404, "UnknownParticipant", f"{participant_id!r} is not registered")
        return TaskListResponse(
            participant_id=participant_id,
            tasks=[_task_doc(state.corpus[sid]) for sid in assigned],
        )

    @app.post(API_PREFIX + "/sessions", response_model=OpenSessionResponse, status_code=201)
    def open_session(req: OpenSessionRequest) -> OpenSessionResponse:
        with state.registry_lock:
            assigned = state.participants.get(req.participant_id)
            if assigned is None:
                raise _error(404, "UnknownParticipant", f"{req.participant_id!r} is not registered")
            if req.snippet_id not in state.corpus:
                raise _error(404, "UnknownSnippet", f"{req.snippet_id!r} is not in the corpus")
            if req.snippet_id not in assigned:
                raise _error(409, "NotAssigned", f"{req.snippet_id!r} is not assigned to {req.participant_id!r}")
            pair = (req.participant_id, req.snippet_id)
            existing = state.pair_to_token.get(pair)
            if existing is not None:
                status = "closed" if state.sessions[existing].closed else "open"
                raise _error(409, "DuplicateSession", f"session for this task already exists ({status})")
            token = uuid.uuid4().hex
            state.store.create_session(
                token,
                req.participant_id,
                req.snippet_id,
                datetime.now(timezone.utc).isoformat(),
            )
            live = LiveSession(
                token=token,
                participant_id=req.participant_id,
                snippet_id=req.snippet_id,
                validator=EventValidator(state.corpus[req.snippet_id]),
            )
            state.sessions[token] = live
            state.pair_to_token[pair] = token
        return OpenSessionResponse(
            token=token, participant_id=req.participant_id, snippet_id=req.snippet_id
        )

    @app.get(API_PREFIX + "/sessions/{token}", response_model=SessionStatusResponse)
    def session_status(token: str) -> SessionStatusResponse:
        live = state.session_or_404(token)
        with live.lock:
            return SessionStatusResponse(
                token=live.token,
                participant_id=live.participant_id,
                snippet_id=live.snippet_id,
                status="closed" if live.closed else "open",
                event_count=live.validator.event_count,
                record=live.record_doc,
            )

    @app.post(API_PREFIX + "/sessions/{token}/events", response_model=EventBatchResponse)
    def append_events(token: str, req: EventBatchRequest) -> EventBatchResponse:
        live = state.session_or_404(token)
        with live.lock:
            if live.closed:
                raise _error(409, "AlreadyClosed", "session already submitted")
            if not req.events:
                return EventBatchResponse(accepted=0, total=live.validator.event_count)
            try:
                events = [event_from_doc(d.as_kernel_doc()) for d in req.events]
            except (MalformedLog, KeyError) as exc:
                raise _error(422, "MalformedEvent", str(exc)) from exc
            if events[0].t < live.validator.last_t:
                raise _error(
                    409,
                    "OutOfOrderBatch",
                    f"batch starts at {events[0].t} ms, already persisted up to {live.validator.last_t} ms",
                )
            trial = live.validator.clone()
            try:
                for ev in events:
                    trial.check(ev)
            except (MalformedLog, EditOutsideBuggyLine) as exc:
                raise _error(422, "MalformedEvent", str(exc)) from exc
            state.store.append_events(token, [event_to_doc(ev) for ev in events])
            live.validator = trial
            return EventBatchResponse(accepted=len(events), total=trial.event_count)

    @app.post(API_PREFIX + "/sessions/{token}/submit", response_model=SubmitResponse)
    def submit(token: str, req: SubmitRequest) -> SubmitResponse:
        live = state.session_or_404(token)
        with live.lock:
            if live.closed:
                raise _error(409, "AlreadyClosed", "session already submitted")
            if live.validator.event_count == 0:
                raise _error(409, "EmptySession", "cannot submit a session with no events")
            if req.t < live.validator.last_t:
                raise _error(
                    422,
                    "MalformedEvent",
                    f"submission at {req.t} ms precedes last event at {live.validator.last_t} ms",
                )
            events = tuple(event_from_doc(d) for d in state.store.load_events(token))
            try:
                record = SessionRecord(
                    snippet_id=live.snippet_id,
                    participant_id=live.participant_id,
                    events=events,
                    label=req.label,
                    final_buggy_line=req.final_buggy_line,
                    duration_ms=req.t,
                    validity=VALIDITY_EXTERNAL if req.external_source else VALIDITY_VALID,
                )
            except ValueError as exc:
                raise _error(422, "MalformedEvent", str(exc)) from exc
            doc = session_to_doc(record)
            state.store.close_session(token, doc)
            live.closed = True
            live.record_doc = doc
            return SubmitResponse(record=doc)

    return app
