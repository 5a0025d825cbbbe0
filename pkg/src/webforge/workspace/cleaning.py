"""Scrub formatting artifacts that models wrap around file payloads.

Model replies routinely fence file content in Markdown code blocks and escape
HTML-significant characters. Both break the written file, so payloads pass
through :func:`clean_artifact_text` before they touch the workspace.

The function iterates to a fixed point, which makes it idempotent by
construction: nested artifacts (a fenced block whose body is itself fenced, an
entity that decodes to another entity) are peeled layer by layer until the
text stops changing.
"""

from __future__ import annotations

import re

# Replacement happens in one left-to-right regex pass, so "&amp;&amp;" decodes
# to "&&" instead of swallowing its neighbor.
_ENTITY_PATTERN = re.compile(r"&(lt|gt|amp|quot|#39);")
_ENTITY_TABLE = {
    "lt": "<",
    "gt": ">",
    "amp": "&",
    "quot": '"',
    "#39": "'",
}

def _strip_wrapping_fences(text: str) -> str:
    """Remove one pair of code fences if they wrap the entire payload.

    Fences inside the text are left alone; only a leading ```-line and a
    closing line that is nothing but ``` count as a wrapper. Blank lines
    around the wrapper are tolerated (models often add them).
    """
    lines = text.split("\n")
    first = 0
    last = len(lines) - 1
    while first <= last and lines[first].strip() == "":
        first += 1
    while last >= first and lines[last].strip() == "":
        last -= 1
    if last - first < 1:
        return text
    if not lines[first].lstrip().startswith("```"):
        return text
    if lines[last].strip() != "```":
        return text
    return "\n".join(lines[first + 1 : last])


def _unescape_entities(text: str) -> str:
    return _ENTITY_PATTERN.sub(lambda m: _ENTITY_TABLE[m.group(1)], text)


def clean_artifact_text(text: str) -> str:
    """Strip wrapping code fences and unescape the five common HTML entities.

    Idempotent: ``clean_artifact_text(clean_artifact_text(x)) ==
    clean_artifact_text(x)``. Text containing neither a wrapping fence nor a
    listed entity is returned unchanged.
    """
    # Every changing pass strictly shortens the text (fences drop lines,
    # entities shrink to single characters), so the loop terminates.
    current = text
    while True:
        cleaned = _unescape_entities(_strip_wrapping_fences(current))
        if cleaned == current:
            return current
        current = cleaned
