"""The development loop: select context, prompt, parse actions, apply edits.

One develop step is one full cycle. A dedicated structured completion picks
the relevant files (updating the context buffer), the development prompt is
assembled in a frozen order (context block, chat summary, instructions,
response format), the reply is parsed into file actions, and the actions are
applied through the workspace. The chat summary is a rolling digest appended
per step and truncated from the oldest end.
"""

from __future__ import annotations

import string
import warnings
from dataclasses import dataclass, field
from importlib import resources

from webforge.errors import (
    EmptyBufferError,
    MalformedAfterRetries,
    PathEscapeError,
    WebforgeError,
)
from webforge.gateway import Grammar, LLMGateway, ModelReply, PromptBundle, ProviderConfig
from webforge.gateway.markup import ActionBlock, SelectionDocument, scan_action_blocks
from webforge.testgen.model import UserRequest
from webforge.workspace import (
    ApplyResult,
    ApplyStatus,
    FileAction,
    TemplateDescriptor,
    WorkspaceState,
    apply_action,
    filter_files,
    render_context,
)
from webforge.workspace.actions import ActionKind
from webforge.workspace.cleaning import clean_artifact_text
from webforge.workspace.diff import DiffParseError, parse_unified_diff
from webforge.workspace.state import normalize_relpath

SYSTEM_TEXT = (
    "You are the development agent of an automated web development pipeline. "
    "Follow the requested output format exactly."
)

NO_HISTORY_MARKER = "(no prior history)"

DEFAULT_SUMMARY_BUDGET = 4000


@dataclass(frozen=True)
class DevTask:
    """Instructions for one develop step: the requirement list or feedback."""

    instruction: str
    round_index: int = 0

    def __post_init__(self):
        if not self.instruction.strip():
            raise WebforgeError("dev task instruction is empty")
        if self.round_index < 0:
            raise WebforgeError("round index must be >= 0")


@dataclass(frozen=True)
class ContextSelection:
    included: tuple[str, ...]
    excluded: tuple[str, ...]
    warnings: tuple[str, ...] = ()


@dataclass
class StepSummary:
    round_index: int
    applied: list[ApplyResult] = field(default_factory=list)
    skipped: list[ApplyResult] = field(default_factory=list)
    rejected: list[ApplyResult] = field(default_factory=list)
    diagnostics: list[str] = field(default_factory=list)
    unproductive: bool = False
    digest: str = ""

    def to_json_dict(self) -> dict:
        return {
            "round_index": self.round_index,
            "applied": [r.to_json_dict() for r in self.applied],
            "skipped": [r.to_json_dict() for r in self.skipped],
            "rejected": [r.to_json_dict() for r in self.rejected],
            "diagnostics": list(self.diagnostics),
            "unproductive": self.unproductive,
            "digest": self.digest,
        }


def _load_prompt(name: str) -> string.Template:
    text = resources.files("webforge.devagent").joinpath(f"prompts/{name}.txt").read_text(
        encoding="utf-8"
    )
    return string.Template(text)


def parse_actions(reply: ModelReply | str) -> tuple[list[FileAction], list[str]]:
    """Convert a reply into file actions; total over arbitrary text.

    Well-formed action tags become FileActions (payloads cleaned, diff
    payloads parsed into hunks); malformed tags become diagnostics without
    disturbing their siblings.
    """
    text = reply.text if isinstance(reply, ModelReply) else reply
    blocks, diagnostics = scan_action_blocks(text)
    actions: list[FileAction] = []
    for block in blocks:
        action, problem = _block_to_action(block)
        if action is not None:
            actions.append(action)
        if problem is not None:
            diagnostics.append(problem)
    return actions, diagnostics


def _block_to_action(block: ActionBlock) -> tuple[FileAction | None, str | None]:
    if block.attrs.get("type", "file").lower() != "file":
        return None, f"unsupported action type {block.attrs.get('type')!r}"
    raw_path = block.attrs.get("filepath", "")
    if not raw_path:
        return None, "action tag without a filePath attribute"
    try:
        path = normalize_relpath(raw_path)
    except PathEscapeError as exc:
        return None, f"unsafe path rejected: {exc}"
    if block.attrs.get("mode", "").lower() == "diff":
        try:
            hunks = tuple(parse_unified_diff(clean_artifact_text(block.payload)))
        except DiffParseError as exc:
            return None, f"diff payload for {path!r} unparseable: {exc}"
        return FileAction(ActionKind.DIFF, path, hunks=hunks), None
    kind = (
        ActionKind.CREATE
        if block.attrs.get("mode", "").lower() == "create"
        else ActionKind.FULL_REPLACE
    )
    return FileAction(kind, path, content=block.payload), None


class DevelopmentAgent:
    def __init__(
        self,
        gateway: LLMGateway,
        config: ProviderConfig,
        fallback_template_id: str | None = None,
        summary_budget: int = DEFAULT_SUMMARY_BUDGET,
    ):
        self.gateway = gateway
        self.config = config
        self.fallback_template_id = fallback_template_id
        self.summary_budget = summary_budget
        self._prompts = {
            name: _load_prompt(name)
            for name in ("select_template", "select_context", "develop")
        }

    # -- template choice ------------------------------------------------------

    def select_template(
        self, request: UserRequest, store: list[TemplateDescriptor]
    ) -> TemplateDescriptor:
        """Classify the request and pick a starter template from the store.

        A single-template store is returned directly without a model call;
        an unknown id from the model falls back to the configured default.
        """
        if not store:
            raise WebforgeError("template store is empty")
        if len(store) == 1:
            return store[0]
        by_id = {descriptor.template_id: descriptor for descriptor in store}
        listing = "\n".join(
            f"- {d.template_id}: {d.description}" for d in sorted(store, key=lambda d: d.template_id)
        )
        text = self._prompts["select_template"].substitute(
            REQUEST=request.description, TEMPLATES=listing
        )
        bundle = PromptBundle(SYSTEM_TEXT, (text,), Grammar.JSON_ARRAY)
        doc = self.gateway.complete_structured(
            bundle, self.config, validator=_validate_template_choice
        )
        chosen = str(doc.document[0]).strip()
        if chosen in by_id:
            return by_id[chosen]
        fallback = self.fallback_template_id
        if fallback is None or fallback not in by_id:
            fallback = sorted(by_id)[0]
        warnings.warn(
            f"model chose unknown template {chosen!r}; falling back to {fallback!r}",
            stacklevel=2,
        )
        return by_id[fallback]

    # -- context selection ----------------------------------------------------

    def select_context(self, ws: WorkspaceState, task: DevTask) -> ContextSelection:
        """Ask the model which files matter, then update the context buffer.

        New buffer = (previous ∪ included) ∖ excluded, restricted to the
        filtered file list; paths outside that list are dropped with a
        warning rather than failing the step.
        """
        available = filter_files(ws)
        loaded = ws.buffer_paths()
        text = self._prompts["select_context"].substitute(
            AVAILABLE_FILES="\n".join(available) or "(none)",
            LOADED_FILES="\n".join(loaded) or "(none)",
            TASK=task.instruction,
        )
        bundle = PromptBundle(SYSTEM_TEXT, (text,), Grammar.XML_SELECTION)
        doc = self.gateway.complete_structured(bundle, self.config)
        selection: SelectionDocument = doc.document

        allowed = set(available)
        problems = list(selection.diagnostics)
        included: list[str] = []
        excluded: list[str] = []
        for raw in selection.included:
            path, problem = _vet_path(raw, allowed)
            if problem:
                problems.append(problem)
            elif path not in included:
                included.append(path)
        for raw in selection.excluded:
            path, problem = _vet_path(raw, allowed)
            if problem:
                problems.append(problem)
            elif path not in excluded:
                excluded.append(path)

        for path in excluded:
            ws.drop_from_buffer(path)
        for entry in list(ws.buffer):
            # Refresh retained snapshots so prompts show current content.
            ws.load_into_buffer(entry.path)
        for path in included:
            if path not in excluded:
                ws.load_into_buffer(path)
        return ContextSelection(tuple(included), tuple(excluded), tuple(problems))

    # -- prompting ------------------------------------------------------------

    def build_dev_prompt(self, ws: WorkspaceState, task: DevTask) -> PromptBundle:
        """Deterministic development prompt; same state + task = same bytes."""
        context_block = render_context(ws)
        summary = ws.chat_summary.strip() or NO_HISTORY_MARKER
        text = self._prompts["develop"].substitute(
            CONTEXT_BUFFER=context_block,
            CHAT_SUMMARY=summary,
            INSTRUCTIONS=task.instruction,
            LOCKED_FILES="\n".join(sorted(ws.locked)) or "(none)",
        )
        return PromptBundle(SYSTEM_TEXT, (text,), Grammar.XML_ACTIONS)

    # -- one full step ----------------------------------------------------------

    def develop_step(self, ws: WorkspaceState, task: DevTask) -> StepSummary:
        """select context -> build prompt -> complete -> parse -> apply.

        Per-action failures are aggregated into the summary; only provider
        transport failures escape as exceptions. A step that could produce no
        actions (or no context) is marked unproductive and left to loop
        control.
        """
        summary = StepSummary(round_index=task.round_index)
        try:
            selection = self.select_context(ws, task)
            summary.diagnostics.extend(selection.warnings)
            bundle = self.build_dev_prompt(ws, task)
            doc = self.gateway.complete_structured(bundle, self.config)
        except (MalformedAfterRetries, EmptyBufferError) as exc:
            summary.unproductive = True
            summary.diagnostics.append(f"step produced no applicable reply: {exc}")
            summary.digest = f"Round {task.round_index}: unproductive step ({exc})."
            self._append_summary(ws, summary.digest)
            return summary

        actions, diagnostics = parse_actions(doc.reply)
        summary.diagnostics.extend(diagnostics)
        for action in actions:
            result = apply_action(ws, action)
            if result.status is ApplyStatus.APPLIED:
                summary.applied.append(result)
            elif result.status is ApplyStatus.LOCKED_SKIPPED:
                summary.skipped.append(result)
            else:
                summary.rejected.append(result)
        summary.unproductive = not summary.applied
        summary.digest = _digest(task.round_index, summary)
        self._append_summary(ws, summary.digest)
        return summary

    def _append_summary(self, ws: WorkspaceState, digest: str) -> None:
        combined = (ws.chat_summary + "\n" + digest).strip()
        if len(combined) > self.summary_budget:
            # Truncate from the oldest end, re-aligning to a line start when
            # the cut lands mid-line.
            tail = combined[-self.summary_budget :]
            newline = tail.find("\n")
            if 0 <= newline < len(tail) - 1:
                tail = tail[newline + 1 :]
            combined = tail
        ws.chat_summary = combined


def _vet_path(raw: str, allowed: set[str]) -> tuple[str, str | None]:
    try:
        path = normalize_relpath(raw)
    except PathEscapeError as exc:
        return "", f"selection path rejected: {exc}"
    if path not in allowed:
        return "", f"selection path not in the available file list: {path!r}"
    return path, None


def _validate_template_choice(rows: list) -> list:
    if not isinstance(rows, list) or len(rows) != 1 or not isinstance(rows[0], str):
        raise ValueError("expected a JSON array containing exactly one template id string")
    return rows


def _digest(round_index: int, summary: StepSummary) -> str:
    created = sum(1 for r in summary.applied if r.kind is ActionKind.CREATE)
    replaced = sum(1 for r in summary.applied if r.kind is ActionKind.FULL_REPLACE)
    patched = sum(1 for r in summary.applied if r.kind is ActionKind.DIFF)
    parts = [
        f"Round {round_index}: applied {len(summary.applied)} action(s) "
        f"(created {created}, replaced {replaced}, patched {patched})"
    ]
    if summary.applied:
        parts.append("files: " + ", ".join(r.path for r in summary.applied))
    if summary.skipped:
        parts.append("skipped locked: " + ", ".join(r.path for r in summary.skipped))
    if summary.rejected:
        parts.append("rejected: " + ", ".join(r.path for r in summary.rejected))
    return "; ".join(parts) + "."
