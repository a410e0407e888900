"""Append-only, fsync-before-ack persistence for the study service.

Layout under the storage root:
  participants.jsonl            one line per registered participant
  sessions/<token>.meta.json    session header, rewritten once on close
  sessions/<token>.events.jsonl one line per event, append-only
  records/<token>.json          final SessionRecord document

Every write is flushed and fsynced before the caller acks, so an acked event
survives a process kill. Nothing here locks; callers serialize per session.
"""

from __future__ import annotations

import json
import os
from pathlib import Path


def _fsync_write(path: Path, text: str, append: bool = False) -> None:
    mode = "a" if append else "w"
    with open(path, mode, encoding="utf-8") as f:
        f.write(text)
        f.flush()
        os.fsync(f.fileno())


class EventStore:
    def __init__(self, root: str | Path) -> None:
        self.root = Path(root)
        self.sessions_dir = self.root / "sessions"
        self.records_dir = self.root / "records"
        self.sessions_dir.mkdir(parents=True, exist_ok=True)
        self.records_dir.mkdir(parents=True, exist_ok=True)

    # -- participants ----------------------------------------------------

    @property
    def _participants_path(self) -> Path:
        return self.root / "participants.jsonl"

    def append_participant(self, participant_id: str, tasks: list[str]) -> None:
        line = json.dumps({"participant_id": participant_id, "tasks": tasks}, sort_keys=True)
        _fsync_write(self._participants_path, line + "\n", append=True)

    def load_participants(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = {}
        if self._participants_path.exists():
            for line in self._participants_path.read_text(encoding="utf-8").splitlines():
                if line.strip():
                    doc = json.loads(line)
                    out[doc["participant_id"]] = list(doc["tasks"])
        return out

    # -- sessions ----------------------------------------------------------

    def _meta_path(self, token: str) -> Path:
        return self.sessions_dir / f"{token}.meta.json"

    def _events_path(self, token: str) -> Path:
        return self.sessions_dir / f"{token}.events.jsonl"

    def create_session(self, token: str, participant_id: str, snippet_id: str, started_at: str) -> None:
        meta = {
            "token": token,
            "participant_id": participant_id,
            "snippet_id": snippet_id,
            "started_at": started_at,
            "status": "open",
        }
        _fsync_write(self._meta_path(token), json.dumps(meta, sort_keys=True) + "\n")
        _fsync_write(self._events_path(token), "")

    def append_events(self, token: str, event_docs: list[dict]) -> None:
        if not event_docs:
            return
        lines = "".join(json.dumps(d, sort_keys=True) + "\n" for d in event_docs)
        _fsync_write(self._events_path(token), lines, append=True)

    def load_events(self, token: str) -> list[dict]:
        path = self._events_path(token)
        if not path.exists():
            return []
        return [
            json.loads(line)
            for line in path.read_text(encoding="utf-8").splitlines()
            if line.strip()
        ]

    def load_metas(self) -> list[dict]:
        return [
            json.loads(p.read_text(encoding="utf-8"))
            for p in sorted(self.sessions_dir.glob("*.meta.json"))
        ]

    def close_session(self, token: str, record_doc: dict) -> None:
        _fsync_write(self.records_dir / f"{token}.json", json.dumps(record_doc, indent=2, sort_keys=True) + "\n")
        meta = json.loads(self._meta_path(token).read_text(encoding="utf-8"))
        meta["status"] = "closed"
        _fsync_write(self._meta_path(token), json.dumps(meta, sort_keys=True) + "\n")
