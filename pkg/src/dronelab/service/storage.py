"""Durable storage: an append-only event journal plus completed-session snapshots.

Events are one JSON object per line with a per-session strictly increasing
sequence number. Completed sessions are appended to ``sessions.jsonl`` in the
shared session-log schema, ready for direct ingestion by the analysis
pipeline, and additionally written as one snapshot file per session.
"""

from __future__ import annotations

import json
import threading
import time
from pathlib import Path

EVENT_KINDS = (
    "created",
    "quiz_answer",
    "decision",
    "flight_outcome",
    "plan_submitted",
    "mpl_choice",
    "questionnaire",
    "payoff",
)


class EventLog:
    def __init__(self, path: Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def append(self, session_id: str, seq: int, kind: str, payload: dict) -> dict:
        if kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind {kind!r}")
        record = {
            "session_id": session_id,
            "seq": seq,
            "kind": kind,
            "payload": payload,
            "ts": time.time(),
        }
        line = json.dumps(record, sort_keys=True)
        with self._lock:
            with self.path.open("a", encoding="utf-8") as handle:
                handle.write(line + "\n")
                handle.flush()
        return record

    def read_all(self) -> list[dict]:
        if not self.path.exists():
            return []
        records = []
        with self.path.open("r", encoding="utf-8") as handle:
            for line in handle:
                line = line.strip()
                if line:
                    records.append(json.loads(line))
        return records

    def read_session(self, session_id: str) -> list[dict]:
        return [r for r in self.read_all() if r["session_id"] == session_id]


class SnapshotStore:
    def __init__(self, directory: Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.index_path = self.directory / "sessions.jsonl"
        self._lock = threading.Lock()

    def write(self, session: dict) -> None:
        line = json.dumps(session, sort_keys=True)
        per_session = self.directory / f"{session['session_id']}.json"
        with self._lock:
            tmp = per_session.with_suffix(".json.tmp")
            tmp.write_text(line + "\n", encoding="utf-8")
            tmp.replace(per_session)
            with self.index_path.open("a", encoding="utf-8") as handle:
                handle.write(line + "\n")
                handle.flush()

    def read_all(self) -> list[dict]:
        if not self.index_path.exists():
            return []
        sessions = []
        with self.index_path.open("r", encoding="utf-8") as handle:
            for line in handle:
                line = line.strip()
                if line:
                    sessions.append(json.loads(line))
        return sessions
