"""Ideation-task lifecycle: slot minting, reward, claim/submit protocol,
latency accounting, delivery of accepted ideas into comment threads.

Claims and submissions against the same orchestrator are serialized by a
single lock; nothing here blocks on human latency, so the lock is cheap.
Mutations accept an explicit ``now`` so a command-log replay reproduces
timestamps exactly.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

from .errors import (
    AlreadyActive,
    AlreadyWorkedTask,
    BadState,
    DeletedCharacterInTeam,
    NoIdeasYet,
    NotClaimant,
    NotFound,
    NoWorkAvailable,
    UnknownTeam,
)
from .workspace import SelectionRange, Workspace, tokenize, word_count

NO_ROLE_LABEL = "no role"


class Strategy(str, Enum):
    ROLE_PLAY = "ROLE_PLAY"
    NO_ROLE = "NO_ROLE"


class TaskState(str, Enum):
    OPEN = "OPEN"
    COMPLETE = "COMPLETE"
    CANCELLED = "CANCELLED"


class SlotState(str, Enum):
    UNCLAIMED = "UNCLAIMED"
    CLAIMED = "CLAIMED"
    SUBMITTED = "SUBMITTED"
    VOID = "VOID"


class RejectReason(str, Enum):
    TIME_LOCK = "TIME_LOCK"
    NO_READ_ATTESTATION = "NO_READ_ATTESTATION"
    TOO_SHORT = "TOO_SHORT"
    COPY_OVERLAP = "COPY_OVERLAP"


def compute_reward(prompt_word_count: int) -> int:
    """Payment in cents: reading cost of $1 per 1000 words plus $1 flat
    writing cost, rounded half-up to a cent."""
    if prompt_word_count < 0:
        raise ValueError("word count must be non-negative")
    return (prompt_word_count + 5) // 10 + 100


def longest_common_token_run(a: list[str], b: list[str]) -> int:
    """Length of the longest contiguous token sequence present in both."""
    if not a or not b:
        return 0
    best = 0
    prev = [0] * (len(b) + 1)
    for i in range(1, len(a) + 1):
        cur = [0] * (len(b) + 1)
        for j in range(1, len(b) + 1):
            if a[i - 1] == b[j - 1]:
                cur[j] = prev[j - 1] + 1
                if cur[j] > best:
                    best = cur[j]
        prev = cur
    return best


@dataclass
class OrchestratorConfig:
    time_lock_seconds: float = 30.0
    min_idea_words: int = 50
    per_character_quota: int = 3
    copy_overlap_tokens: int = 15


@dataclass
class IdeationTask:
    id: str
    document_id: str
    prompt: SelectionRange
    team_id: str
    note: str
    strategy: Strategy
    per_character_quota: int
    reward_cents: int
    thread_id: str
    created_at: float
    state: TaskState = TaskState.OPEN
    slot_ids: list[str] = field(default_factory=list)


@dataclass
class AssignmentSlot:
    id: str
    task_id: str
    role: str | None  # character id; None under NO_ROLE
    state: SlotState = SlotState.UNCLAIMED
    claimed_by: str | None = None
    offered_at: float | None = None
    read_bottom_attested: bool = False


@dataclass
class IdeaSubmission:
    id: str
    slot_id: str
    worker_id: str
    body: str
    submitted_at: float
    elapsed_read_seconds: float
    distance_scores: dict[str, float] = field(default_factory=dict)


@dataclass
class AssignmentOffer:
    slot_id: str
    task_id: str
    prompt: str
    role_name: str | None
    role_description: str | None
    note: str
    reward_cents: int
    time_lock_seconds: float
    min_idea_words: int
    read_bottom_required: bool = True


@dataclass
class Rejection:
    reason: RejectReason
    message: str
    retry_after_seconds: float | None = None


@dataclass
class TaskLatencyReport:
    first_idea: float
    last_idea: float
    per_character_coverage: float | None


# scorer(prompt_text, idea_text, idea_id, task_id) -> {metric: distance}
Scorer = Callable[[str, str, str, str], dict[str, float]]


class Orchestrator:
    def __init__(self, workspace: Workspace,
                 config: OrchestratorConfig | None = None,
                 scorer: Scorer | None = None):
        self.ws = workspace
        self.config = config or OrchestratorConfig()
        self.scorer = scorer
        self._lock = threading.RLock()
        self.tasks: dict[str, IdeationTask] = {}
        self.slots: dict[str, AssignmentSlot] = {}
        self.submissions: dict[str, IdeaSubmission] = {}
        self._task_order: list[str] = []  # creation order, oldest first
        self._seq: dict[str, int] = {}

    def _mint(self, prefix: str) -> str:
        n = self._seq.get(prefix, 0) + 1
        self._seq[prefix] = n
        return f"{prefix}-{n}"

    # --- task creation ---

    def create_ideation_task(self, document_id: str, start: int, end: int,
                             team_id: str, note: str = "",
                             strategy: Strategy = Strategy.ROLE_PLAY,
                             per_character_quota: int | None = None,
                             now: float | None = None) -> IdeationTask:
        strategy = Strategy(strategy)
        quota = per_character_quota if per_character_quota is not None \
            else self.config.per_character_quota
        if quota < 1:
            raise ValueError("per_character_quota must be >= 1")
        with self._lock:
            team = self.ws.teams.get(team_id)
            if team is None or team.deleted:
                raise UnknownTeam(f"team {team_id}")
            members = []
            for mid in team.member_ids:
                char = self.ws.characters.get(mid)
                if char is None or char.deleted:
                    raise DeletedCharacterInTeam(f"character {mid}")
                members.append(char)
            selection = self.ws.capture_selection(document_id, start, end)
            ts = now if now is not None else time.time()
            roster = "; ".join(f"{c.name}: {c.description}" for c in members)
            overview = (
                f"Story ideation in progress for the selected passage. "
                f"Team \"{team.name}\" ({len(members)} characters) - {roster}. "
                f"Ideas arrive as replies below."
            )
            thread = self.ws.create_thread(document_id, start, end, overview, now=ts)
            task = IdeationTask(
                id=self._mint("task"),
                document_id=document_id,
                prompt=selection,
                team_id=team_id,
                note=note,
                strategy=strategy,
                per_character_quota=quota,
                reward_cents=compute_reward(word_count(selection.snapshot)),
                thread_id=thread.id,
                created_at=ts,
            )
            for char in members:
                for _ in range(quota):
                    slot = AssignmentSlot(
                        id=self._mint("slot"),
                        task_id=task.id,
                        role=char.id if strategy is Strategy.ROLE_PLAY else None,
                    )
                    self.slots[slot.id] = slot
                    task.slot_ids.append(slot.id)
            self.tasks[task.id] = task
            self._task_order.append(task.id)
            return task

    def get_task(self, task_id: str) -> IdeationTask:
        with self._lock:
            task = self.tasks.get(task_id)
            if task is None:
                raise NotFound(f"task {task_id}")
            return task

    # --- worker protocol ---

    def _accepted_task_ids(self, worker_id: str) -> set[str]:
        return {self.slots[s.slot_id].task_id
                for s in self.submissions.values() if s.worker_id == worker_id}

    def claim_assignment(self, worker_id: str,
                         now: float | None = None) -> AssignmentOffer:
        with self._lock:
            for slot in self.slots.values():
                if slot.state is SlotState.CLAIMED and slot.claimed_by == worker_id:
                    raise AlreadyActive(f"worker {worker_id} already holds slot {slot.id}")
            worked = self._accepted_task_ids(worker_id)
            blocked_only = False
            for task_id in self._task_order:
                task = self.tasks[task_id]
                if task.state is not TaskState.OPEN:
                    continue
                open_slots = [self.slots[sid] for sid in task.slot_ids
                              if self.slots[sid].state is SlotState.UNCLAIMED]
                if not open_slots:
                    continue
                if task_id in worked:
                    blocked_only = True
                    continue
                slot = open_slots[0]
                slot.state = SlotState.CLAIMED
                slot.claimed_by = worker_id
                slot.offered_at = now if now is not None else time.time()
                slot.read_bottom_attested = False
                role_name = role_desc = None
                if slot.role is not None:
                    char = self.ws.characters[slot.role]
                    role_name, role_desc = char.name, char.description
                return AssignmentOffer(
                    slot_id=slot.id,
                    task_id=task.id,
                    prompt=task.prompt.snapshot,
                    role_name=role_name,
                    role_description=role_desc,
                    note=task.note,
                    reward_cents=task.reward_cents,
                    time_lock_seconds=self.config.time_lock_seconds,
                    min_idea_words=self.config.min_idea_words,
                )
            if blocked_only:
                raise AlreadyWorkedTask(f"worker {worker_id} already submitted on every open task")
            raise NoWorkAvailable("no unclaimed slots")

    def _claimed_slot(self, slot_id: str, worker_id: str) -> AssignmentSlot:
        slot = self.slots.get(slot_id)
        if slot is None:
            raise NotFound(f"slot {slot_id}")
        if slot.state is not SlotState.CLAIMED:
            raise BadState(f"slot {slot_id} is {slot.state.value}")
        if slot.claimed_by != worker_id:
            raise NotClaimant(f"slot {slot_id} not claimed by {worker_id}")
        return slot

    def attest_read_bottom(self, slot_id: str, worker_id: str) -> None:
        with self._lock:
            self._claimed_slot(slot_id, worker_id).read_bottom_attested = True

    def submit_idea(self, slot_id: str, worker_id: str, body: str,
                    now: float | None = None) -> IdeaSubmission | Rejection:
        with self._lock:
            slot = self._claimed_slot(slot_id, worker_id)
            task = self.tasks[slot.task_id]
            ts = now if now is not None else time.time()
            elapsed = ts - slot.offered_at
            rejection = self._check_gates(task, slot, body, elapsed)
            if rejection is not None:
                slot.state = SlotState.UNCLAIMED
                slot.claimed_by = None
                slot.offered_at = None
                slot.read_bottom_attested = False
                return rejection
            slot.state = SlotState.SUBMITTED
            sub = IdeaSubmission(
                id=self._mint("sub"),
                slot_id=slot.id,
                worker_id=worker_id,
                body=body,
                submitted_at=ts,
                elapsed_read_seconds=elapsed,
            )
            self.submissions[sub.id] = sub
            if self.scorer is not None:
                sub.distance_scores = self.scorer(task.prompt.snapshot, body,
                                                  sub.id, task.id)
            label = NO_ROLE_LABEL if slot.role is None \
                else self.ws.characters[slot.role].name
            self.ws.append_reply(task.thread_id, label, body, now=ts)
            if all(self.slots[sid].state is SlotState.SUBMITTED
                   for sid in task.slot_ids):
                task.state = TaskState.COMPLETE
            return sub

    def _check_gates(self, task: IdeationTask, slot: AssignmentSlot,
                     body: str, elapsed: float) -> Rejection | None:
        cfg = self.config
        if elapsed < cfg.time_lock_seconds:
            return Rejection(
                RejectReason.TIME_LOCK,
                f"submitted {elapsed:.1f}s after offer; lock is {cfg.time_lock_seconds:.0f}s",
                retry_after_seconds=cfg.time_lock_seconds - elapsed,
            )
        if not slot.read_bottom_attested:
            return Rejection(RejectReason.NO_READ_ATTESTATION,
                             "story prompt was not read to the bottom")
        wc = word_count(body)
        if wc < cfg.min_idea_words:
            return Rejection(RejectReason.TOO_SHORT,
                             f"idea has {wc} words; minimum is {cfg.min_idea_words}")
        run = longest_common_token_run(tokenize(body), tokenize(task.prompt.snapshot))
        if run >= cfg.copy_overlap_tokens:
            return Rejection(RejectReason.COPY_OVERLAP,
                             f"{run} contiguous tokens copied from the prompt")
        return None

    # --- reporting ---

    def task_submissions(self, task_id: str) -> list[IdeaSubmission]:
        with self._lock:
            task = self.get_task(task_id)
            slot_set = set(task.slot_ids)
            subs = [s for s in self.submissions.values() if s.slot_id in slot_set]
            subs.sort(key=lambda s: (s.submitted_at, s.id))
            return subs

    def task_status(self, task_id: str) -> dict:
        with self._lock:
            task = self.get_task(task_id)
            counts = {state.value: 0 for state in SlotState}
            for sid in task.slot_ids:
                counts[self.slots[sid].state.value] += 1
            by_role: dict[str, list[IdeaSubmission]] = {}
            for sub in self.task_submissions(task_id):
                role = self.slots[sub.slot_id].role
                label = NO_ROLE_LABEL if role is None else self.ws.characters[role].name
                by_role.setdefault(label, []).append(sub)
            try:
                latency = self.latency_report(task_id)
            except NoIdeasYet:
                latency = None
            return {
                "task": task,
                "state": task.state,
                "slots": counts,
                "ideas_by_role": by_role,
                "reward_cents": task.reward_cents,
                "latency": latency,
            }

    def latency_report(self, task_id: str) -> TaskLatencyReport:
        """Durations (seconds) from overview-thread creation to accepted
        submissions: first idea, full per-character coverage, last idea."""
        with self._lock:
            task = self.get_task(task_id)
            t0 = self.ws.get_thread(task.thread_id).created_at
            subs = self.task_submissions(task_id)
            if not subs:
                raise NoIdeasYet(f"task {task_id} has no accepted ideas")
            times = [s.submitted_at for s in subs]
            first = min(times) - t0
            last = max(times) - t0
            if task.strategy is Strategy.ROLE_PLAY:
                first_by_char: dict[str, float] = {}
                for sub in subs:
                    role = self.slots[sub.slot_id].role
                    if role not in first_by_char or sub.submitted_at < first_by_char[role]:
                        first_by_char[role] = sub.submitted_at
                members = self.ws.teams[task.team_id].member_ids
                if all(m in first_by_char for m in members):
                    coverage = max(first_by_char[m] for m in members) - t0
                else:
                    coverage = None
            else:
                coverage = first
            return TaskLatencyReport(first_idea=first, last_idea=last,
                                     per_character_coverage=coverage)

    def cancel_task(self, task_id: str) -> None:
        with self._lock:
            task = self.get_task(task_id)
            if task.state is not TaskState.OPEN:
                raise BadState(f"task {task_id} is {task.state.value}")
            task.state = TaskState.CANCELLED
            for sid in task.slot_ids:
                slot = self.slots[sid]
                if slot.state in (SlotState.UNCLAIMED, SlotState.CLAIMED):
                    slot.state = SlotState.VOID
                    slot.claimed_by = None
                    slot.offered_at = None
