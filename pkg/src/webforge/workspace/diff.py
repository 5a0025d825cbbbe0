"""Unified-diff parsing and strict hunk application.

Diff-mode edits arrive as unified-diff text inside an action tag. Parsing is
tolerant about framing (``---``/``+++`` file headers and ``diff``/``Index:``
lines are accepted and ignored) but strict about hunk content: line counts
must agree with the hunk header and context/removal lines must match the file
exactly. Fuzzy matching is deliberately not offered: a silently misapplied
hunk corrupts generated code in ways that are much harder to debug than a
rejected edit.

Application semantics follow the classic unified-diff conventions:

* for a hunk with ``old_length > 0``, ``old_start`` is the 1-based line number
  of the first affected line;
* for a pure insertion (``old_length == 0``), ``old_start`` names the line
  *after which* the new lines are inserted (0 inserts at the top);
* ``\\ No newline at end of file`` markers are honored on both sides.
"""

from __future__ import annotations

import difflib
import re
from dataclasses import dataclass, field

from webforge.errors import DiffContextMismatchError, DiffParseError

CONTEXT = "context"
ADD = "add"
REMOVE = "remove"

_HUNK_HEADER = re.compile(r"^@@ -(\d+)(?:,(\d+))? \+(\d+)(?:,(\d+))? @@")


@dataclass(frozen=True)
class DiffLine:
    tag: str  # context | add | remove
    text: str
    no_newline: bool = False


@dataclass(frozen=True)
class DiffHunk:
    old_start: int
    old_length: int
    new_start: int
    new_length: int
    lines: tuple[DiffLine, ...] = field(default_factory=tuple)

    def __post_init__(self):
        old = sum(1 for l in self.lines if l.tag in (CONTEXT, REMOVE))
        new = sum(1 for l in self.lines if l.tag in (CONTEXT, ADD))
        if old != self.old_length or new != self.new_length:
            raise DiffParseError(
                f"hunk line counts disagree with header: header says "
                f"-{self.old_length}/+{self.new_length}, body has -{old}/+{new}"
            )


def _split_lines(content: str) -> tuple[list[str], bool]:
    """Split file content into lines without terminators.

    Returns (lines, ends_with_newline). An empty file has zero lines.
    """
    if content == "":
        return [], True
    ends = content.endswith("\n")
    lines = content.split("\n")
    if ends:
        lines.pop()
    return lines, ends


def parse_unified_diff(text: str) -> list[DiffHunk]:
    """Parse unified-diff text into hunks.

    Raises DiffParseError on anything that cannot be understood. File headers
    are optional; hunk section labels after the second ``@@`` are ignored.
    """
    hunks: list[DiffHunk] = []
    lines = text.split("\n")
    i = 0
    while i < len(lines):
        line = lines[i]
        if line.startswith(("--- ", "+++ ", "diff ", "Index:")) or line.strip() == "":
            i += 1
            continue
        match = _HUNK_HEADER.match(line)
        if match is None:
            raise DiffParseError(f"expected a hunk header, got {line!r}")
        old_start = int(match.group(1))
        old_length = int(match.group(2)) if match.group(2) is not None else 1
        new_start = int(match.group(3))
        new_length = int(match.group(4)) if match.group(4) is not None else 1
        i += 1

        body: list[DiffLine] = []
        remaining_old = old_length
        remaining_new = new_length
        while i < len(lines) and (remaining_old > 0 or remaining_new > 0):
            raw = lines[i]
            if raw.startswith(" "):
                tag, payload = CONTEXT, raw[1:]
                remaining_old -= 1
                remaining_new -= 1
            elif raw.startswith("+"):
                tag, payload = ADD, raw[1:]
                remaining_new -= 1
            elif raw.startswith("-"):
                tag, payload = REMOVE, raw[1:]
                remaining_old -= 1
            elif raw == "":
                # Context line whose single leading space was stripped in
                # transit; common in model output.
                tag, payload = CONTEXT, ""
                remaining_old -= 1
                remaining_new -= 1
            else:
                raise DiffParseError(f"unexpected line inside hunk: {raw!r}")
            if remaining_old < 0 or remaining_new < 0:
                raise DiffParseError("hunk body overruns its header counts")
            i += 1
            no_newline = False
            if i < len(lines) and lines[i].startswith("\\"):
                no_newline = True
                i += 1
            body.append(DiffLine(tag, payload, no_newline))

        hunks.append(DiffHunk(old_start, old_length, new_start, new_length, tuple(body)))

    if not hunks:
        raise DiffParseError("no hunks found")
    _check_hunk_order(hunks)
    return hunks


def _check_hunk_order(hunks: list[DiffHunk]) -> None:
    previous_end = -1
    previous_start = -1
    for hunk in hunks:
        begin = hunk.old_start - 1 if hunk.old_length > 0 else hunk.old_start
        if hunk.old_start <= previous_start or begin < previous_end:
            raise DiffParseError("hunks must be non-overlapping and in ascending order")
        previous_start = hunk.old_start
        previous_end = begin + hunk.old_length


def apply_hunks(content: str, hunks: list[DiffHunk] | tuple[DiffHunk, ...]) -> str:
    """Apply parsed hunks to ``content`` and return the new text.

    Raises DiffContextMismatchError (leaving the caller's file untouched) if
    any context or removal line disagrees with the file, or a hunk points
    outside it.
    """
    old_lines, old_ends_nl = _split_lines(content)
    out: list[str] = []
    # Newline flag for the would-be final line; updated as lines are emitted.
    last_has_newline = True
    cursor = 0  # index into old_lines of the next uncopied line

    for hunk in hunks:
        begin = hunk.old_start - 1 if hunk.old_length > 0 else hunk.old_start
        if begin < cursor or begin > len(old_lines):
            raise DiffContextMismatchError(
                f"hunk @@ -{hunk.old_start},{hunk.old_length} @@ points outside the file"
            )
        while cursor < begin:
            out.append(old_lines[cursor])
            last_has_newline = _original_line_has_newline(cursor, old_lines, old_ends_nl)
            cursor += 1
        for line in hunk.lines:
            if line.tag in (CONTEXT, REMOVE):
                if cursor >= len(old_lines):
                    raise DiffContextMismatchError(
                        f"hunk expects line {cursor + 1} but the file has only "
                        f"{len(old_lines)} line(s)"
                    )
                actual = old_lines[cursor]
                if actual != line.text:
                    raise DiffContextMismatchError(
                        f"line {cursor + 1} mismatch: hunk says {line.text!r}, "
                        f"file has {actual!r}"
                    )
                cursor += 1
            if line.tag in (CONTEXT, ADD):
                out.append(line.text)
                last_has_newline = not line.no_newline

    while cursor < len(old_lines):
        out.append(old_lines[cursor])
        last_has_newline = _original_line_has_newline(cursor, old_lines, old_ends_nl)
        cursor += 1

    if not out:
        return ""
    return "\n".join(out) + ("\n" if last_has_newline else "")


def _original_line_has_newline(index: int, lines: list[str], ends_nl: bool) -> bool:
    return ends_nl or index < len(lines) - 1


def make_unified_diff(old: str, new: str, context: int = 3) -> str:
    """Well-formed unified diff between two texts (no file headers).

    Unlike raw :func:`difflib.unified_diff` output, lines without a trailing
    newline get the standard ``\\ No newline at end of file`` marker, so the
    result always parses back with :func:`parse_unified_diff`.
    """
    raw = difflib.unified_diff(
        old.splitlines(keepends=True), new.splitlines(keepends=True), n=context
    )
    out: list[str] = []
    for i, line in enumerate(raw):
        if i < 2:  # the ---/+++ header pair
            continue
        if line.endswith("\n"):
            out.append(line)
        else:
            out.append(line + "\n\\ No newline at end of file\n")
    return "".join(out)
