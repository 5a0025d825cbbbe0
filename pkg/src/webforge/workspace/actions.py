"""File actions parsed from model replies, and their application."""

from __future__ import annotations

import enum
from dataclasses import dataclass

from webforge.errors import DiffContextMismatchError, WorkspaceError
from webforge.workspace.cleaning import clean_artifact_text
from webforge.workspace.diff import DiffHunk, apply_hunks
from webforge.workspace.state import WorkspaceState, normalize_relpath


class ActionKind(str, enum.Enum):
    CREATE = "create"
    FULL_REPLACE = "full-replace"
    DIFF = "diff"


class ApplyStatus(str, enum.Enum):
    APPLIED = "applied"
    LOCKED_SKIPPED = "locked-skipped"
    CONTEXT_MISMATCH = "context-mismatch"
    WRITE_FAILED = "write-failed"


@dataclass(frozen=True)
class FileAction:
    """One edit instruction: create a file, replace it, or patch it.

    The path is normalized at construction (raising PathEscapeError on
    escapes); create/full-replace carry the complete new content, diff
    carries at least one hunk.
    """

    kind: ActionKind
    path: str
    content: str | None = None
    hunks: tuple[DiffHunk, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "path", normalize_relpath(self.path))
        if self.kind in (ActionKind.CREATE, ActionKind.FULL_REPLACE):
            if self.content is None:
                raise WorkspaceError(f"{self.kind.value} action needs full content")
        elif self.kind is ActionKind.DIFF:
            if not self.hunks:
                raise WorkspaceError("diff action needs at least one hunk")
        else:  # pragma: no cover - enum is closed
            raise WorkspaceError(f"unknown action kind {self.kind!r}")


@dataclass(frozen=True)
class ApplyResult:
    kind: ActionKind
    path: str
    status: ApplyStatus
    bytes_written: int = 0
    note: str = ""

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "path": self.path,
            "status": self.status.value,
            "bytes_written": self.bytes_written,
            "note": self.note,
        }


def apply_action(ws: WorkspaceState, action: FileAction) -> ApplyResult:
    """Apply one action to the workspace.

    Locked targets are skipped (never aborting a batch), diff hunks that
    disagree with the file reject the action and leave the file untouched.
    Payloads are cleaned of formatting artifacts before being written.
    """
    if action.path in ws.locked:
        return ApplyResult(
            action.kind,
            action.path,
            ApplyStatus.LOCKED_SKIPPED,
            note="file is locked; edit skipped",
        )

    if action.kind is ActionKind.DIFF:
        if not ws.exists(action.path):
            return ApplyResult(
                action.kind,
                action.path,
                ApplyStatus.CONTEXT_MISMATCH,
                note="diff target does not exist",
            )
        current = ws.read_file(action.path)
        try:
            updated = apply_hunks(current, action.hunks)
        except DiffContextMismatchError as exc:
            return ApplyResult(
                action.kind, action.path, ApplyStatus.CONTEXT_MISMATCH, note=str(exc)
            )
        written = ws.write_file(action.path, updated)
        return ApplyResult(action.kind, action.path, ApplyStatus.APPLIED, written)

    note = ""
    if action.kind is ActionKind.CREATE and ws.exists(action.path):
        note = "create on existing path; treated as full replace"
    payload = clean_artifact_text(action.content or "")
    try:
        written = ws.write_file(action.path, payload)
    except OSError as exc:
        # A path component collides with an existing file, permissions, etc.
        return ApplyResult(
            action.kind, action.path, ApplyStatus.WRITE_FAILED, note=str(exc)
        )
    return ApplyResult(action.kind, action.path, ApplyStatus.APPLIED, written, note)
