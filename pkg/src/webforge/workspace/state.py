"""Workspace state: file index, locks, context buffer, chat summary."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from webforge.canonical import fingerprint_of, sha256_hex
from webforge.errors import PathEscapeError

# Workspace bookkeeping file; never part of the project tree.
META_FILENAME = ".webforge.json"

_DRIVE_PREFIX = re.compile(r"^[A-Za-z]:")


def normalize_relpath(path: str) -> str:
    """Normalize a model- or user-supplied path to a safe relative POSIX path.

    Raises PathEscapeError for absolute paths, drive letters, parent-directory
    escapes, and empty results. Normalization never consults the filesystem.
    """
    candidate = path.strip().replace("\\", "/")
    if candidate.startswith("/") or _DRIVE_PREFIX.match(candidate):
        raise PathEscapeError(f"absolute path not allowed: {path!r}")
    parts = []
    for part in candidate.split("/"):
        if part in ("", "."):
            continue
        if part == "..":
            raise PathEscapeError(f"parent-directory escape in {path!r}")
        parts.append(part)
    if not parts:
        raise PathEscapeError(f"empty path after normalization: {path!r}")
    return "/".join(parts)


@dataclass
class BufferEntry:
    path: str
    content: str
    line_count: int


@dataclass
class WorkspaceState:
    """The development agent's world model of one project tree.

    ``file_index`` maps normalized relative paths to content hashes; the
    context buffer holds the snapshots the next development prompt will show.
    All mutations of one state are expected to happen from a single writer.
    """

    root: Path
    template: "TemplateDescriptor"  # noqa: F821 - import cycle kept lazy
    file_index: dict[str, str] = field(default_factory=dict)
    locked: set[str] = field(default_factory=set)
    buffer: list[BufferEntry] = field(default_factory=list)
    chat_summary: str = ""

    @property
    def template_id(self) -> str:
        return self.template.template_id

    # -- file access ------------------------------------------------------

    def _resolve(self, relpath: str) -> Path:
        rel = normalize_relpath(relpath)
        target = (self.root / rel).resolve()
        if not target.is_relative_to(self.root.resolve()):
            raise PathEscapeError(f"{relpath!r} resolves outside the workspace")
        return target

    def read_file(self, relpath: str) -> str:
        return self._resolve(relpath).read_text(encoding="utf-8")

    def write_file(self, relpath: str, content: str) -> int:
        """Write content, update the index, refresh any buffer snapshot."""
        rel = normalize_relpath(relpath)
        target = self._resolve(rel)
        target.parent.mkdir(parents=True, exist_ok=True)
        data = content.encode("utf-8")
        target.write_bytes(data)
        self.file_index[rel] = sha256_hex(data)
        for entry in self.buffer:
            if entry.path == rel:
                entry.content = content
                entry.line_count = count_lines(content)
        return len(data)

    def exists(self, relpath: str) -> bool:
        return normalize_relpath(relpath) in self.file_index

    # -- index and hashing --------------------------------------------------

    def refresh_index(self) -> None:
        self.file_index = scan_tree(self.root)

    def tree_hash(self) -> str:
        """Order-independent hash of (path, content hash) pairs."""
        return fingerprint_of(sorted(self.file_index.items()))

    # -- context buffer -----------------------------------------------------

    def buffer_paths(self) -> list[str]:
        return [entry.path for entry in self.buffer]

    def load_into_buffer(self, relpath: str) -> None:
        rel = normalize_relpath(relpath)
        content = self.read_file(rel)
        for entry in self.buffer:
            if entry.path == rel:
                entry.content = content
                entry.line_count = count_lines(content)
                return
        self.buffer.append(BufferEntry(rel, content, count_lines(content)))

    def drop_from_buffer(self, relpath: str) -> None:
        rel = normalize_relpath(relpath)
        self.buffer = [entry for entry in self.buffer if entry.path != rel]


def count_lines(content: str) -> int:
    if content == "":
        return 0
    lines = content.split("\n")
    if content.endswith("\n"):
        lines.pop()
    return len(lines)


def scan_tree(root: Path) -> dict[str, str]:
    index: dict[str, str] = {}
    for path in sorted(root.rglob("*")):
        if not path.is_file():
            continue
        rel = path.relative_to(root).as_posix()
        if rel == META_FILENAME:
            continue
        index[rel] = sha256_hex(path.read_bytes())
    return index


def is_hidden(relpath: str) -> bool:
    return any(part.startswith(".") for part in relpath.split("/"))


def glob_to_regex(pattern: str) -> re.Pattern[str]:
    """Translate a filter glob to a full-path regex.

    ``**`` crosses directory separators, ``*`` and ``?`` do not. A trailing
    ``/**`` also matches the bare directory prefix itself.
    """
    out = []
    i = 0
    while i < len(pattern):
        ch = pattern[i]
        if ch == "*":
            if pattern[i : i + 3] == "**/":
                out.append(r"(?:[^/]+/)*")
                i += 3
                continue
            if pattern[i : i + 2] == "**":
                out.append(r".*")
                i += 2
                continue
            out.append(r"[^/]*")
        elif ch == "?":
            out.append(r"[^/]")
        else:
            out.append(re.escape(ch))
        i += 1
    return re.compile("^" + "".join(out) + "$")


def filter_files(ws: WorkspaceState) -> list[str]:
    """Index paths minus hidden files and the template's filter rules, sorted.

    Hidden files and directories (any path segment starting with ``.``) are
    always excluded, independent of the rule list.
    """
    rules = [glob_to_regex(rule) for rule in ws.template.filter_rules]
    kept = []
    for path in ws.file_index:
        if is_hidden(path):
            continue
        if any(rule.match(path) for rule in rules):
            continue
        kept.append(path)
    return sorted(kept)
