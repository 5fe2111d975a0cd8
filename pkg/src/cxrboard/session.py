"""Event-sourced review sessions.

A session's only durable form is its append-only JSONL event log (one
file per session, fsync on every append).  In-memory state is a pure
fold over that log, so replaying the file always reproduces the exact
state: the service can restart, or an auditor can re-derive any report,
without a database.

Stage order is fixed: QUALITY, ORIENTATION, A, B, C, D, E, SUMMARY.
Forward movement is one unvisited stage at a time; going back to any
visited stage is always allowed.  Finalizing demands every stage visited
and every finding verdicted; the guard names each blocker so nothing is
signed off unseen.
"""

from __future__ import annotations

import json
import os
import threading
import time
import uuid
from dataclasses import dataclass, field

from .errors import (
    IncompleteReview,
    SessionFinalized,
    StageNotReachable,
    UnknownSession,
)

STAGES = ("QUALITY", "ORIENTATION", "A", "B", "C", "D", "E", "SUMMARY")
FINALIZED = "FINALIZED"
PRE_SUMMARY_STAGES = STAGES[:-1]  # the 7 stages attested in the report

VERDICT_VALUES = ("ACCEPT", "REJECT", "UNCERTAIN")

SESSION_STARTED = "SESSION_STARTED"
STAGE_ENTERED = "STAGE_ENTERED"
VERDICT_SET = "VERDICT_SET"
MANUAL_CHECK_SET = "MANUAL_CHECK_SET"
REPORT_FINALIZED = "REPORT_FINALIZED"
EVENT_KINDS = (
    SESSION_STARTED,
    STAGE_ENTERED,
    VERDICT_SET,
    MANUAL_CHECK_SET,
    REPORT_FINALIZED,
)


def canonical_json(obj) -> str:
    """Stable serialization: sorted keys, no whitespace."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


@dataclass(frozen=True)
class SessionEvent:
    seq: int
    kind: str
    ts: float
    payload: dict

    def to_line(self) -> str:
        return canonical_json(
            {"seq": self.seq, "kind": self.kind, "ts": self.ts, "payload": self.payload}
        )

    @staticmethod
    def from_line(line: str) -> "SessionEvent":
        obj = json.loads(line)
        return SessionEvent(
            seq=obj["seq"], kind=obj["kind"], ts=obj["ts"], payload=obj["payload"]
        )


@dataclass
class SessionState:
    session_id: str
    image_id: str = ""
    clinician_id: str = ""
    stage_cursor: str = STAGES[0]
    visited: set[str] = field(default_factory=set)
    verdicts: dict[str, dict] = field(default_factory=dict)
    manual_checks: dict[str, bool] = field(default_factory=dict)
    created_at: float = 0.0
    updated_at: float = 0.0
    last_seq: int = 0
    finalized: bool = False
    report: dict | None = None

    @property
    def next_stage(self) -> str | None:
        """The next stage in the fixed order after the cursor."""
        if self.finalized or self.stage_cursor == STAGES[-1]:
            return None
        return STAGES[STAGES.index(self.stage_cursor) + 1]

    def reachable_stages(self) -> set[str]:
        out = set(self.visited)
        nxt = self.next_stage
        if nxt is not None:
            out.add(nxt)
        return out

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "image_id": self.image_id,
            "clinician_id": self.clinician_id,
            "stage_cursor": self.stage_cursor,
            "visited": [s for s in STAGES if s in self.visited],
            "verdicts": self.verdicts,
            "manual_checks": self.manual_checks,
            "created_at": self.created_at,
            "updated_at": self.updated_at,
            "finalized": self.finalized,
        }


def apply_event(state: SessionState | None, event: SessionEvent) -> SessionState:
    """The fold step: one event onto one state."""
    if event.kind == SESSION_STARTED:
        if state is not None:
            raise ValueError("SESSION_STARTED on an existing state")
        p = event.payload
        return SessionState(
            session_id=p["session_id"],
            image_id=p["image_id"],
            clinician_id=p["clinician_id"],
            stage_cursor=STAGES[0],
            visited=set(),
            created_at=event.ts,
            updated_at=event.ts,
            last_seq=event.seq,
        )
    if state is None:
        raise ValueError(f"event {event.kind} before SESSION_STARTED")
    if event.seq != state.last_seq + 1:
        raise ValueError(f"event seq {event.seq} after seq {state.last_seq}: gap")
    state.last_seq = event.seq
    state.updated_at = event.ts
    if event.kind == STAGE_ENTERED:
        stage = event.payload["stage"]
        state.stage_cursor = stage
        state.visited.add(stage)
    elif event.kind == VERDICT_SET:
        p = event.payload
        state.verdicts[p["finding_id"]] = {
            "verdict": p["verdict"],
            "note": p.get("note", ""),
            "ts": event.ts,
        }
    elif event.kind == MANUAL_CHECK_SET:
        state.manual_checks[event.payload["key"]] = bool(event.payload["value"])
    elif event.kind == REPORT_FINALIZED:
        state.finalized = True
        state.stage_cursor = FINALIZED
        state.report = event.payload.get("report")
    else:
        raise ValueError(f"unknown event kind {event.kind}")
    return state


def fold_events(events: list[SessionEvent]) -> SessionState:
    state: SessionState | None = None
    for event in events:
        state = apply_event(state, event)
    if state is None:
        raise ValueError("empty event list")
    return state


class SessionStore:
    """One JSONL file per session under a directory; fsync on append.

    Mutations serialize on a per-session lock (one logical writer);
    reads return the cached fold, which is only replaced under the lock.
    """

    def __init__(self, directory: str, now_fn=time.time, id_fn=None):
        self._dir = directory
        os.makedirs(directory, exist_ok=True)
        self._now = now_fn
        self._new_id = id_fn or (lambda: uuid.uuid4().hex[:12])
        self._states: dict[str, SessionState] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()

    def _path(self, session_id: str) -> str:
        return os.path.join(self._dir, f"{session_id}.jsonl")

    def _lock_for(self, session_id: str) -> threading.Lock:
        with self._registry_lock:
            return self._locks.setdefault(session_id, threading.Lock())

    def list_ids(self) -> list[str]:
        return sorted(
            name[: -len(".jsonl")]
            for name in os.listdir(self._dir)
            if name.endswith(".jsonl")
        )

    def events(self, session_id: str) -> list[SessionEvent]:
        path = self._path(session_id)
        if not os.path.exists(path):
            raise UnknownSession(session_id)
        with open(path, "r", encoding="utf-8") as fh:
            return [SessionEvent.from_line(line) for line in fh if line.strip()]

    def replay(self, session_id: str) -> SessionState:
        """Fresh fold straight from disk, bypassing the cache."""
        return fold_events(self.events(session_id))

    def get(self, session_id: str) -> SessionState:
        state = self._states.get(session_id)
        if state is None:
            state = self.replay(session_id)
            with self._lock_for(session_id):
                self._states.setdefault(session_id, state)
                state = self._states[session_id]
        return state

    def _append_locked(self, session_id: str, kind: str, payload: dict) -> SessionState:
        state = self._states.get(session_id)
        if state is None and kind != SESSION_STARTED:
            state = self.replay(session_id)
            self._states[session_id] = state
        seq = (state.last_seq if state else 0) + 1
        event = SessionEvent(seq=seq, kind=kind, ts=float(self._now()), payload=payload)
        fd = os.open(self._path(session_id), os.O_WRONLY | os.O_APPEND | os.O_CREAT, 0o644)
        try:
            os.write(fd, (event.to_line() + "\n").encode("utf-8"))
            os.fsync(fd)
        finally:
            os.close(fd)
        new_state = apply_event(state, event)
        self._states[session_id] = new_state
        return new_state

    def append(self, session_id: str, kind: str, payload: dict) -> SessionState:
        with self._lock_for(session_id):
            return self._append_locked(session_id, kind, payload)

    # --- state machine operations ------------------------------------------

    def start(self, image_id: str, clinician_id: str) -> SessionState:
        session_id = self._new_id()
        while os.path.exists(self._path(session_id)):
            session_id = self._new_id()
        with self._lock_for(session_id):
            self._append_locked(
                session_id,
                SESSION_STARTED,
                {
                    "session_id": session_id,
                    "image_id": image_id,
                    "clinician_id": clinician_id,
                },
            )
            return self._append_locked(session_id, STAGE_ENTERED, {"stage": STAGES[0]})

    def advance(self, session_id: str) -> SessionState:
        with self._lock_for(session_id):
            state = self.get(session_id)
            if state.finalized:
                raise SessionFinalized(session_id)
            nxt = state.next_stage
            if nxt is None:
                raise StageNotReachable(
                    f"no stage after {state.stage_cursor}; finalize instead"
                )
            return self._append_locked(session_id, STAGE_ENTERED, {"stage": nxt})

    def back(self, session_id: str, stage: str) -> SessionState:
        with self._lock_for(session_id):
            state = self.get(session_id)
            if state.finalized:
                raise SessionFinalized(session_id)
            if stage not in STAGES:
                raise StageNotReachable(f"unknown stage {stage!r}")
            if stage not in state.visited:
                raise StageNotReachable(f"stage {stage} not visited yet")
            return self._append_locked(session_id, STAGE_ENTERED, {"stage": stage})

    def set_verdict(
        self, session_id: str, finding_id: str, verdict: str, note: str,
        finding_stage: str,
    ) -> SessionState:
        if verdict not in VERDICT_VALUES:
            raise ValueError(f"verdict {verdict!r} not in {VERDICT_VALUES}")
        with self._lock_for(session_id):
            state = self.get(session_id)
            if state.finalized:
                raise SessionFinalized(session_id)
            if finding_stage not in state.visited:
                raise StageNotReachable(
                    f"finding belongs to stage {finding_stage}, not visited yet"
                )
            return self._append_locked(
                session_id,
                VERDICT_SET,
                {"finding_id": finding_id, "verdict": verdict, "note": note},
            )

    def set_manual_check(self, session_id: str, key: str, value: bool) -> SessionState:
        with self._lock_for(session_id):
            state = self.get(session_id)
            if state.finalized:
                raise SessionFinalized(session_id)
            return self._append_locked(
                session_id, MANUAL_CHECK_SET, {"key": key, "value": bool(value)}
            )

    def finalize(self, session_id: str, all_finding_ids: list[str], report_builder) -> dict:
        """Validate completeness, build the report, and seal the session.

        ``report_builder(state)`` must be a pure function of the folded
        state (plus immutable study data) so replaying the log re-derives
        the identical report.
        """
        with self._lock_for(session_id):
            state = self.get(session_id)
            if state.finalized:
                raise SessionFinalized(session_id)
            missing = [s for s in STAGES if s not in state.visited]
            unverdicted = [f for f in all_finding_ids if f not in state.verdicts]
            if missing or unverdicted:
                raise IncompleteReview(missing, unverdicted)
            report = report_builder(state)
            self._append_locked(session_id, REPORT_FINALIZED, {"report": report})
            return report
