"""Event-sourced persistence: a command store wrapping the workspace and
orchestrator.

Every state-mutating command is executed deterministically given
(command kind, args, timestamp), appended to a JSONL log, and only then
acknowledged.  Recovery loads the latest snapshot and re-executes the
logged commands with their pinned timestamps, which reproduces the exact
pre-crash state including minted ids.  Snapshots compact the log.

Worker mutations carry an optional idempotency key; retries return the
original outcome instead of executing twice.
"""

from __future__ import annotations

import json
import os
import threading
import time
from datetime import datetime, timezone

from . import workspace as ws_mod
from .errors import RecoveryError
from .orchestrator import (
    AssignmentOffer,
    AssignmentSlot,
    IdeaSubmission,
    IdeationTask,
    Orchestrator,
    OrchestratorConfig,
    Rejection,
    SlotState,
    Strategy,
    TaskLatencyReport,
    TaskState,
)
from .workspace import (
    CharacterProfile,
    CommentThread,
    Document,
    Reply,
    SelectionRange,
    Team,
    Workspace,
)

EVENTS_FILE = "events.jsonl"
SNAPSHOT_FILE = "snapshot.json"


def iso(ts: float | None) -> str | None:
    if ts is None:
        return None
    return datetime.fromtimestamp(ts, tz=timezone.utc).isoformat(timespec="milliseconds")


# --- wire/serialization helpers ---

def character_payload(c: CharacterProfile) -> dict:
    return {"id": c.id, "name": c.name, "description": c.description,
            "image_ref": c.image_ref, "created_at": iso(c.created_at),
            "deleted": c.deleted}


def team_payload(t: Team) -> dict:
    return {"id": t.id, "name": t.name, "member_ids": list(t.member_ids)}


def selection_payload(s: SelectionRange) -> dict:
    return {"document_id": s.document_id, "start": s.start, "end": s.end,
            "snapshot": s.snapshot, "revision_at_capture": s.revision_at_capture}


def thread_payload(t: CommentThread) -> dict:
    return {"id": t.id, "document_id": t.document_id,
            "anchor": selection_payload(t.anchor), "overview": t.overview,
            "created_at": iso(t.created_at), "orphaned": t.orphaned,
            "replies": [{"author_label": r.author_label, "body": r.body,
                         "at": iso(r.at)} for r in t.replies]}


def document_payload(d: Document, threads: list[CommentThread]) -> dict:
    return {"id": d.id, "title": d.title, "body": d.body, "revision": d.revision,
            "threads": [thread_payload(t) for t in threads]}


def submission_payload(s: IdeaSubmission) -> dict:
    return {"id": s.id, "slot_id": s.slot_id, "worker_id": s.worker_id,
            "body": s.body, "submitted_at": iso(s.submitted_at),
            "elapsed_read_seconds": s.elapsed_read_seconds,
            "distance_scores": dict(s.distance_scores)}


def offer_payload(o: AssignmentOffer) -> dict:
    return {"slot_id": o.slot_id, "task_id": o.task_id, "prompt": o.prompt,
            "role_name": o.role_name, "role_description": o.role_description,
            "note": o.note, "reward_cents": o.reward_cents,
            "time_lock_seconds": o.time_lock_seconds,
            "min_idea_words": o.min_idea_words,
            "read_bottom_required": o.read_bottom_required}


def latency_payload(r: TaskLatencyReport | None) -> dict | None:
    if r is None:
        return None
    return {"first_idea_seconds": r.first_idea,
            "last_idea_seconds": r.last_idea,
            "per_character_coverage_seconds": r.per_character_coverage}


def task_payload(t: IdeationTask) -> dict:
    return {"id": t.id, "document_id": t.document_id,
            "prompt": selection_payload(t.prompt), "team_id": t.team_id,
            "note": t.note, "strategy": t.strategy.value,
            "per_character_quota": t.per_character_quota,
            "reward_cents": t.reward_cents, "thread_id": t.thread_id,
            "created_at": iso(t.created_at), "state": t.state.value,
            "slot_ids": list(t.slot_ids)}


class Store:
    """Composes workspace + orchestrator behind a logged command interface."""

    def __init__(self, data_dir: str,
                 orch_config: OrchestratorConfig | None = None,
                 scorer=None):
        self.data_dir = data_dir
        os.makedirs(data_dir, exist_ok=True)
        self._lock = threading.RLock()
        self.ws = Workspace()
        self.orch = Orchestrator(self.ws, orch_config, scorer=scorer)
        self.idempotency: dict[str, dict] = {}
        self.seq = 0
        self._events_path = os.path.join(data_dir, EVENTS_FILE)
        self._snapshot_path = os.path.join(data_dir, SNAPSHOT_FILE)
        self._events_fh = None
        self._recover()
        self._events_fh = open(self._events_path, "a", encoding="utf-8")

    def close(self) -> None:
        with self._lock:
            if self._events_fh:
                self._events_fh.close()
                self._events_fh = None

    # --- command interface ---

    def command(self, kind: str, args: dict, now: float | None = None,
                idempotency_key: str | None = None) -> dict:
        """Execute, append the event, then return the response payload."""
        with self._lock:
            if idempotency_key is not None and idempotency_key in self.idempotency:
                return self.idempotency[idempotency_key]
            ts_ms = int(round((now if now is not None else time.time()) * 1000))
            result = self._execute(kind, args, ts_ms / 1000.0)
            self.seq += 1
            record = {"seq": self.seq, "ts_ms": ts_ms, "kind": kind, "args": args}
            if idempotency_key is not None:
                record["idem"] = idempotency_key
                self.idempotency[idempotency_key] = result
            self._append(record)
            return result

    def _append(self, record: dict) -> None:
        line = json.dumps(record, separators=(",", ":"))
        self._events_fh.write(line + "\n")
        self._events_fh.flush()
        os.fsync(self._events_fh.fileno())

    def _execute(self, kind: str, args: dict, now: float) -> dict:
        handler = getattr(self, "_cmd_" + kind.replace(".", "_"), None)
        if handler is None:
            raise ValueError(f"unknown command {kind}")
        return handler(args, now)

    # --- command handlers (deterministic given state + args + now) ---

    def _cmd_character_create(self, args: dict, now: float) -> dict:
        c = self.ws.create_character(args["name"], args.get("description", ""),
                                     args.get("image_ref"), now=now)
        return character_payload(c)

    def _cmd_character_update(self, args: dict, now: float) -> dict:
        c = self.ws.update_character(args["id"], name=args.get("name"),
                                     description=args.get("description"),
                                     image_ref=args.get("image_ref"))
        return character_payload(c)

    def _cmd_character_delete(self, args: dict, now: float) -> dict:
        self.ws.delete_character(args["id"])
        return {"deleted": args["id"]}

    def _cmd_team_create(self, args: dict, now: float) -> dict:
        t = self.ws.create_team(args["name"], args["member_ids"])
        return team_payload(t)

    def _cmd_team_update(self, args: dict, now: float) -> dict:
        t = self.ws.update_team(args["id"], name=args.get("name"),
                                member_ids=args.get("member_ids"))
        return team_payload(t)

    def _cmd_team_delete(self, args: dict, now: float) -> dict:
        self.ws.delete_team(args["id"])
        return {"deleted": args["id"]}

    def _cmd_document_create(self, args: dict, now: float) -> dict:
        d = self.ws.create_document(args["title"], args.get("body", ""))
        return document_payload(d, [])

    def _cmd_document_edit(self, args: dict, now: float) -> dict:
        d = self.ws.edit_document(args["id"], args["at"], args["delete_len"],
                                  args["insert"])
        return document_payload(d, self.ws.list_threads(d.id))

    def _cmd_task_create(self, args: dict, now: float) -> dict:
        t = self.orch.create_ideation_task(
            args["document_id"], args["start"], args["end"], args["team_id"],
            note=args.get("note", ""),
            strategy=Strategy(args.get("strategy", "ROLE_PLAY")),
            per_character_quota=args.get("per_character_quota"),
            now=now)
        return task_payload(t)

    def _cmd_task_cancel(self, args: dict, now: float) -> dict:
        self.orch.cancel_task(args["id"])
        return {"cancelled": args["id"]}

    def _cmd_work_claim(self, args: dict, now: float) -> dict:
        offer = self.orch.claim_assignment(args["worker_id"], now=now)
        return offer_payload(offer)

    def _cmd_work_attest(self, args: dict, now: float) -> dict:
        self.orch.attest_read_bottom(args["slot_id"], args["worker_id"])
        return {"attested": args["slot_id"]}

    def _cmd_work_submit(self, args: dict, now: float) -> dict:
        res = self.orch.submit_idea(args["slot_id"], args["worker_id"],
                                    args["body"], now=now)
        if isinstance(res, Rejection):
            return {"accepted": False, "reason": res.reason.value,
                    "message": res.message,
                    "retry_after_seconds": res.retry_after_seconds}
        return {"accepted": True, "submission": submission_payload(res)}

    # --- snapshot / recovery ---

    def state_dict(self) -> dict:
        """Full state as a JSON-able dict; also the deep-equality basis."""
        with self._lock:
            ws, orch = self.ws, self.orch
            return {
                "seq": self.seq,
                "workspace": {
                    "characters": [vars(c).copy() for c in ws.characters.values()],
                    "teams": [vars(t).copy() for t in ws.teams.values()],
                    "documents": [vars(d).copy() for d in ws.documents.values()],
                    "threads": [{
                        "id": t.id, "document_id": t.document_id,
                        "anchor": vars(t.anchor).copy(), "overview": t.overview,
                        "created_at": t.created_at, "orphaned": t.orphaned,
                        "replies": [vars(r).copy() for r in t.replies],
                    } for t in ws.threads.values()],
                    "seq": dict(ws._seq),
                },
                "orchestrator": {
                    "tasks": [{**vars(t), "prompt": vars(t.prompt).copy(),
                               "strategy": t.strategy.value,
                               "state": t.state.value,
                               "slot_ids": list(t.slot_ids)}
                              for t in orch.tasks.values()],
                    "slots": [{**vars(s), "state": s.state.value}
                              for s in orch.slots.values()],
                    "submissions": [{**vars(s),
                                     "distance_scores": dict(s.distance_scores)}
                                    for s in orch.submissions.values()],
                    "task_order": list(orch._task_order),
                    "seq": dict(orch._seq),
                },
                "idempotency": dict(self.idempotency),
            }

    def _load_state(self, state: dict) -> None:
        ws, orch = self.ws, self.orch
        wsd = state["workspace"]
        ws.characters = {c["id"]: CharacterProfile(**c) for c in wsd["characters"]}
        ws.teams = {t["id"]: Team(**t) for t in wsd["teams"]}
        ws.documents = {d["id"]: Document(**d) for d in wsd["documents"]}
        ws.threads = {}
        for td in wsd["threads"]:
            ws.threads[td["id"]] = CommentThread(
                id=td["id"], document_id=td["document_id"],
                anchor=SelectionRange(**td["anchor"]), overview=td["overview"],
                created_at=td["created_at"], orphaned=td["orphaned"],
                replies=[Reply(**r) for r in td["replies"]])
        ws._seq = dict(wsd["seq"])
        od = state["orchestrator"]
        orch.tasks = {}
        for td in od["tasks"]:
            td = dict(td)
            td["prompt"] = SelectionRange(**td["prompt"])
            td["strategy"] = Strategy(td["strategy"])
            td["state"] = TaskState(td["state"])
            orch.tasks[td["id"]] = IdeationTask(**td)
        orch.slots = {}
        for sd in od["slots"]:
            sd = dict(sd)
            sd["state"] = SlotState(sd["state"])
            orch.slots[sd["id"]] = AssignmentSlot(**sd)
        orch.submissions = {s["id"]: IdeaSubmission(**s)
                            for s in od["submissions"]}
        orch._task_order = list(od["task_order"])
        orch._seq = dict(od["seq"])
        self.idempotency = dict(state["idempotency"])
        self.seq = state["seq"]

    def snapshot(self) -> str:
        """Write a snapshot of the full state and truncate the event log."""
        with self._lock:
            tmp = self._snapshot_path + ".tmp"
            with open(tmp, "w", encoding="utf-8") as fh:
                json.dump(self.state_dict(), fh)
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp, self._snapshot_path)
            if self._events_fh:
                self._events_fh.close()
            self._events_fh = open(self._events_path, "w", encoding="utf-8")
            return self._snapshot_path

    def _recover(self) -> None:
        try:
            if os.path.exists(self._snapshot_path):
                with open(self._snapshot_path, encoding="utf-8") as fh:
                    self._load_state(json.load(fh))
            if os.path.exists(self._events_path):
                with open(self._events_path, encoding="utf-8") as fh:
                    for line in fh:
                        line = line.strip()
                        if not line:
                            continue
                        record = json.loads(line)
                        if record["seq"] <= self.seq:
                            continue
                        result = self._execute(record["kind"], record["args"],
                                               record["ts_ms"] / 1000.0)
                        if "idem" in record:
                            self.idempotency[record["idem"]] = result
                        self.seq = record["seq"]
        except Exception as exc:
            raise RecoveryError(f"cannot recover from {self.data_dir}: {exc}")
