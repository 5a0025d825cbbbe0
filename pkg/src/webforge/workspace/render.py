"""Render the context buffer into the development prompt's file block."""

from __future__ import annotations

from webforge.errors import EmptyBufferError
from webforge.workspace.state import WorkspaceState


def _numbered(content: str) -> str:
    """Prefix each line with a fixed-width 1-based line number.

    A trailing newline does not produce an extra empty numbered line; the
    final newline survives as the terminator of the last numbered line.
    """
    if content == "":
        return ""
    lines = content.split("\n")
    if content.endswith("\n"):
        lines.pop()
    width = len(str(len(lines)))
    return "".join(f"{i:>{width}} | {line}\n" for i, line in enumerate(lines, start=1))


def render_context(ws: WorkspaceState) -> str:
    """The ``<ContextBuffer>`` block shown to the development model.

    Files appear in buffer order, each wrapped in a file tag carrying its
    relative path, contents line-numbered from 1. The format is frozen:
    prompts built from the same state must be byte-identical.
    """
    if not ws.buffer:
        raise EmptyBufferError("context buffer is empty; select files first")
    blocks = []
    for entry in ws.buffer:
        blocks.append(
            f'<file filePath="{entry.path}">\n{_numbered(entry.content)}</file>'
        )
    return "<ContextBuffer>\n" + "\n".join(blocks) + "\n</ContextBuffer>"
