"""Tolerant extraction of structured payloads from model replies.

Models wrap structured output in prose, fences, or broken tags; every parser
here is total over arbitrary text. Grammar-level acceptance (does the reply
contain anything usable at all?) is decided by the gateway, which re-asks on
rejection; fine-grained conversion happens in the calling agent.

The reply grammars are frozen:

* actions: ``<Action type="file" filePath="relative/path">payload</Action>``,
  with an optional ``mode="diff"`` attribute selecting unified-diff payloads;
* selection: ``<Selection>`` containing ``<include path="..."/>`` and
  ``<exclude path="..."/>`` elements (self-closing or paired);
* json-array: the first top-level JSON array found in the reply.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from webforge.workspace.cleaning import clean_artifact_text

_ACTION_OPEN = re.compile(r"<Action\b([^>]*)>", re.IGNORECASE)
_ACTION_CLOSE = re.compile(r"</Action\s*>", re.IGNORECASE)
_ATTR = re.compile(r"(\w+)\s*=\s*\"([^\"]*)\"")
_SELECTION_ENTRY = re.compile(
    r"<(include|exclude)\b([^>]*?)(?:/>|>\s*</\1\s*>)", re.IGNORECASE
)


class StructureNotFound(ValueError):
    """The reply contains no usable instance of the expected structure."""


@dataclass(frozen=True)
class ActionBlock:
    """One raw action tag: attributes plus verbatim payload."""

    attrs: dict[str, str]
    payload: str


@dataclass(frozen=True)
class SelectionDocument:
    included: tuple[str, ...]
    excluded: tuple[str, ...]
    diagnostics: tuple[str, ...] = field(default_factory=tuple)


def scan_action_blocks(text: str) -> tuple[list[ActionBlock], list[str]]:
    """Find all well-formed action tags; never raises.

    Malformed tags (unterminated, missing attributes) become diagnostics and
    well-formed siblings are still returned.
    """
    blocks: list[ActionBlock] = []
    diagnostics: list[str] = []
    for match in _ACTION_OPEN.finditer(text):
        attrs = {k.lower(): v for k, v in _ATTR.findall(match.group(1))}
        close = _ACTION_CLOSE.search(text, match.end())
        if close is None:
            diagnostics.append(
                f"unterminated action tag at offset {match.start()} "
                f"(filePath={attrs.get('filepath', '?')!r})"
            )
            continue
        payload = text[match.end() : close.start()]
        # Payloads conventionally start on the line after the opening tag and
        # end on the line before the closing tag.
        if payload.startswith("\n"):
            payload = payload[1:]
        if payload.endswith("\n"):
            payload = payload[:-1]
        blocks.append(ActionBlock(attrs=attrs, payload=payload))
    return blocks, diagnostics


def parse_selection(text: str) -> SelectionDocument:
    """Extract include/exclude path lists; never raises.

    A reply with no ``<Selection>`` block and no include/exclude entries
    yields an empty document with a diagnostic; the gateway treats that as
    a grammar violation.
    """
    included: list[str] = []
    excluded: list[str] = []
    diagnostics: list[str] = []
    for match in _SELECTION_ENTRY.finditer(text):
        attrs = {k.lower(): v for k, v in _ATTR.findall(match.group(2))}
        path = attrs.get("path", "").strip()
        if not path:
            diagnostics.append(f"{match.group(1)} entry without a path attribute")
            continue
        if match.group(1).lower() == "include":
            included.append(path)
        else:
            excluded.append(path)
    has_block = re.search(r"<Selection\b", text, re.IGNORECASE) is not None
    if not has_block and not included and not excluded:
        diagnostics.append("no selection block or include/exclude entries found")
    return SelectionDocument(tuple(included), tuple(excluded), tuple(diagnostics))


def selection_is_wellformed(doc: SelectionDocument) -> bool:
    return not (
        doc.diagnostics
        and "no selection block or include/exclude entries found" in doc.diagnostics
    )


def extract_json_array(text: str) -> list:
    """Parse the first JSON array in the reply, after artifact cleaning.

    Raises StructureNotFound when no parseable array exists.
    """
    cleaned = clean_artifact_text(text)
    decoder = json.JSONDecoder()
    start = cleaned.find("[")
    while start != -1:
        try:
            value, _ = decoder.raw_decode(cleaned, start)
        except json.JSONDecodeError:
            start = cleaned.find("[", start + 1)
            continue
        if isinstance(value, list):
            return value
        start = cleaned.find("[", start + 1)
    raise StructureNotFound("no JSON array found in reply")
