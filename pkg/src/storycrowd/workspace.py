"""Writer-side assets: characters, teams, documents, anchored comment threads.

All mutation methods accept an optional ``now`` (epoch seconds) so callers
that replay a command log can pin timestamps; live callers omit it.
Every public method takes the workspace lock, so the class is safe to use
from multiple request handlers at once.
"""

from __future__ import annotations

import re
import threading
import time
from dataclasses import dataclass, field


_WHITESPACE_RUN = re.compile(r"[ \t\n\r]+")

from .errors import (
    DuplicateMember,
    EmptyName,
    EmptyTeam,
    InvalidAnchor,
    NotFound,
    OutOfBounds,
    UnknownMember,
)


def word_count(text: str) -> int:
    """Count maximal runs of non-whitespace (space, tab, newline, CR)."""
    return sum(1 for part in _WHITESPACE_RUN.split(text) if part)


def tokenize(text: str) -> list[str]:
    """Split into word tokens; same rule word_count uses."""
    return [part for part in _WHITESPACE_RUN.split(text) if part]


@dataclass
class CharacterProfile:
    id: str
    name: str
    description: str
    image_ref: str | None
    created_at: float
    deleted: bool = False


@dataclass
class Team:
    id: str
    name: str
    member_ids: list[str]
    deleted: bool = False


@dataclass
class Document:
    id: str
    title: str
    body: str
    revision: int = 0


@dataclass
class SelectionRange:
    document_id: str
    start: int
    end: int
    snapshot: str
    revision_at_capture: int


@dataclass
class Reply:
    author_label: str
    body: str
    at: float


@dataclass
class CommentThread:
    id: str
    document_id: str
    anchor: SelectionRange
    overview: str
    created_at: float
    replies: list[Reply] = field(default_factory=list)
    orphaned: bool = False


class Workspace:
    def __init__(self):
        self._lock = threading.RLock()
        self.characters: dict[str, CharacterProfile] = {}
        self.teams: dict[str, Team] = {}
        self.documents: dict[str, Document] = {}
        self.threads: dict[str, CommentThread] = {}
        self._seq: dict[str, int] = {}

    def _mint(self, prefix: str) -> str:
        n = self._seq.get(prefix, 0) + 1
        self._seq[prefix] = n
        return f"{prefix}-{n}"

    # --- characters ---

    def create_character(self, name: str, description: str = "",
                         image_ref: str | None = None,
                         now: float | None = None) -> CharacterProfile:
        if not name.strip():
            raise EmptyName("character name is empty")
        with self._lock:
            char = CharacterProfile(
                id=self._mint("ch"),
                name=name,
                description=description,
                image_ref=image_ref,
                created_at=now if now is not None else time.time(),
            )
            self.characters[char.id] = char
            return char

    def get_character(self, char_id: str) -> CharacterProfile:
        with self._lock:
            char = self.characters.get(char_id)
            if char is None:
                raise NotFound(f"character {char_id}")
            return char

    def update_character(self, char_id: str, *, name: str | None = None,
                         description: str | None = None,
                         image_ref: str | None = None) -> CharacterProfile:
        with self._lock:
            char = self.get_character(char_id)
            if name is not None:
                if not name.strip():
                    raise EmptyName("character name is empty")
                char.name = name
            if description is not None:
                char.description = description
            if image_ref is not None:
                char.image_ref = image_ref
            return char

    def delete_character(self, char_id: str) -> None:
        with self._lock:
            self.get_character(char_id).deleted = True

    def list_characters(self, include_deleted: bool = False) -> list[CharacterProfile]:
        with self._lock:
            return [c for c in self.characters.values()
                    if include_deleted or not c.deleted]

    # --- teams ---

    def _check_members(self, member_ids: list[str]) -> None:
        if not member_ids:
            raise EmptyTeam("team has no members")
        if len(set(member_ids)) != len(member_ids):
            raise DuplicateMember("duplicate character in team")
        for mid in member_ids:
            char = self.characters.get(mid)
            if char is None or char.deleted:
                raise UnknownMember(f"character {mid} missing or deleted")

    def create_team(self, name: str, member_ids: list[str]) -> Team:
        if not name.strip():
            raise EmptyName("team name is empty")
        with self._lock:
            self._check_members(member_ids)
            team = Team(id=self._mint("tm"), name=name, member_ids=list(member_ids))
            self.teams[team.id] = team
            return team

    def get_team(self, team_id: str) -> Team:
        with self._lock:
            team = self.teams.get(team_id)
            if team is None:
                raise NotFound(f"team {team_id}")
            return team

    def update_team(self, team_id: str, *, name: str | None = None,
                    member_ids: list[str] | None = None) -> Team:
        with self._lock:
            team = self.get_team(team_id)
            if name is not None:
                if not name.strip():
                    raise EmptyName("team name is empty")
                team.name = name
            if member_ids is not None:
                self._check_members(member_ids)
                team.member_ids = list(member_ids)
            return team

    def delete_team(self, team_id: str) -> None:
        with self._lock:
            self.get_team(team_id).deleted = True

    def list_teams(self) -> list[Team]:
        with self._lock:
            return [t for t in self.teams.values() if not t.deleted]

    # --- documents ---

    def create_document(self, title: str, body: str = "") -> Document:
        with self._lock:
            doc = Document(id=self._mint("doc"), title=title, body=body)
            self.documents[doc.id] = doc
            return doc

    def get_document(self, doc_id: str) -> Document:
        with self._lock:
            doc = self.documents.get(doc_id)
            if doc is None:
                raise NotFound(f"document {doc_id}")
            return doc

    def edit_document(self, doc_id: str, at: int, delete_len: int,
                      insert: str) -> Document:
        """Apply a splice edit and remap every live thread anchor.

        Edits strictly before an anchor shift it by the length delta; edits
        strictly after leave it alone; anything touching the anchored span
        orphans the thread and freezes its anchor.
        """
        with self._lock:
            doc = self.get_document(doc_id)
            if at < 0 or delete_len < 0 or at + delete_len > len(doc.body):
                raise OutOfBounds(f"edit [{at}, {at + delete_len}) outside body")
            doc.body = doc.body[:at] + insert + doc.body[at + delete_len:]
            doc.revision += 1
            delta = len(insert) - delete_len
            for thread in self.threads.values():
                if thread.document_id != doc_id or thread.orphaned:
                    continue
                a = thread.anchor
                if self._edit_before(at, delete_len, a.start):
                    a.start += delta
                    a.end += delta
                elif self._edit_after(at, delete_len, a.end):
                    pass
                else:
                    thread.orphaned = True
            return doc

    @staticmethod
    def _edit_before(at: int, delete_len: int, anchor_start: int) -> bool:
        if delete_len == 0:
            return at <= anchor_start
        return at + delete_len <= anchor_start

    @staticmethod
    def _edit_after(at: int, delete_len: int, anchor_end: int) -> bool:
        return at >= anchor_end

    # --- threads ---

    def capture_selection(self, doc_id: str, start: int, end: int) -> SelectionRange:
        with self._lock:
            doc = self.get_document(doc_id)
            if not (0 <= start < end <= len(doc.body)):
                raise InvalidAnchor(f"selection [{start}, {end}) invalid for document of length {len(doc.body)}")
            return SelectionRange(
                document_id=doc_id,
                start=start,
                end=end,
                snapshot=doc.body[start:end],
                revision_at_capture=doc.revision,
            )

    def create_thread(self, doc_id: str, start: int, end: int, overview: str,
                      now: float | None = None) -> CommentThread:
        with self._lock:
            anchor = self.capture_selection(doc_id, start, end)
            thread = CommentThread(
                id=self._mint("th"),
                document_id=doc_id,
                anchor=anchor,
                overview=overview,
                created_at=now if now is not None else time.time(),
            )
            self.threads[thread.id] = thread
            return thread

    def get_thread(self, thread_id: str) -> CommentThread:
        with self._lock:
            thread = self.threads.get(thread_id)
            if thread is None:
                raise NotFound(f"thread {thread_id}")
            return thread

    def append_reply(self, thread_id: str, author_label: str, body: str,
                     now: float | None = None) -> CommentThread:
        with self._lock:
            thread = self.get_thread(thread_id)
            thread.replies.append(Reply(
                author_label=author_label,
                body=body,
                at=now if now is not None else time.time(),
            ))
            return thread

    def list_threads(self, doc_id: str) -> list[CommentThread]:
        with self._lock:
            return [t for t in self.threads.values() if t.document_id == doc_id]
