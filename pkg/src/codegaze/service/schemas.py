"""Wire documents for the study service HTTP API (versioned at /api/v1)."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field

PARTICIPANT_ID_PATTERN = r"^[A-Za-z0-9][A-Za-z0-9_.-]{0,63}$"


class RegisterRequest(BaseModel):
    participant_id: str = Field(pattern=PARTICIPANT_ID_PATTERN)


class RegisterResponse(BaseModel):
    participant_id: str
    tasks: list[str]


class TaskDoc(BaseModel):
    snippet_id: str
    source: str
    buggy_line: int
    description: str
    token_count: int
    session_minutes: int


class TaskListResponse(BaseModel):
    participant_id: str
    tasks: list[TaskDoc]


class OpenSessionRequest(BaseModel):
    participant_id: str = Field(pattern=PARTICIPANT_ID_PATTERN)
    snippet_id: str


class OpenSessionResponse(BaseModel):
    token: str
    participant_id: str
    snippet_id: str


class EventDoc(BaseModel):
    """Loose event shape; the session kernel does the precise validation."""

    t: int = Field(ge=0)
    kind: Literal["unblur", "blur_everything", "edit"]
    focus: int | None = None
    visible: list[int] | None = None
    line: int | None = None
    text: str | None = None
    input: str | None = None

    def as_kernel_doc(self) -> dict:
        doc: dict = {"t": self.t, "kind": self.kind}
        if self.kind == "unblur":
            doc["focus"] = self.focus
            doc["visible"] = self.visible if self.visible is not None else []
            if self.input is not None:
                doc["input"] = self.input
        elif self.kind == "edit":
            doc["line"] = self.line
            doc["text"] = self.text if self.text is not None else ""
        return doc


class EventBatchRequest(BaseModel):
    events: list[EventDoc]


class EventBatchResponse(BaseModel):
    accepted: int
    total: int


class SubmitRequest(BaseModel):
    t: int = Field(ge=1, description="submission timestamp, ms since session start")
    label: Literal["fix_done", "cannot_fix"]
    final_buggy_line: str
    external_source: bool = False


class SubmitResponse(BaseModel):
    record: dict


class SessionStatusResponse(BaseModel):
    token: str
    participant_id: str
    snippet_id: str
    status: Literal["open", "closed"]
    event_count: int
    record: dict | None = None
