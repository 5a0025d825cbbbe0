"""Project file tree: templates, edit application, context rendering."""

from webforge.workspace.actions import ApplyResult, ApplyStatus, FileAction, apply_action
from webforge.workspace.cleaning import clean_artifact_text
from webforge.workspace.diff import DiffHunk, DiffLine, apply_hunks, parse_unified_diff
from webforge.workspace.render import render_context
from webforge.workspace.state import WorkspaceState, filter_files, normalize_relpath
from webforge.workspace.templates import (
    ReadinessProbe,
    TemplateDescriptor,
    TemplateStore,
    init_from_template,
    load_workspace,
)

__all__ = [
    "ApplyResult",
    "ApplyStatus",
    "FileAction",
    "apply_action",
    "clean_artifact_text",
    "DiffHunk",
    "DiffLine",
    "apply_hunks",
    "parse_unified_diff",
    "render_context",
    "WorkspaceState",
    "filter_files",
    "normalize_relpath",
    "ReadinessProbe",
    "TemplateDescriptor",
    "TemplateStore",
    "init_from_template",
    "load_workspace",
]
