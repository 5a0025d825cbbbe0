"""Starter-template store and workspace bootstrap.

A template lives in a local store directory as::

    <store>/<template-id>/manifest.json
    <store>/<template-id>/files/...      # the seed project tree

The manifest declares how to launch the project, how to probe readiness,
which paths are irrelevant for context selection, and which files are
protected from model edits.
"""

from __future__ import annotations

import json
import shutil
from dataclasses import dataclass, field
from pathlib import Path

from webforge.errors import DestinationNotEmpty, TemplateNotFound, WorkspaceError
from webforge.workspace.state import META_FILENAME, WorkspaceState, scan_tree

# Injected into every descriptor so build artifacts and dependency dirs are
# always filtered, even when a manifest omits them. Hidden files are excluded
# by filter_files() itself.
DEFAULT_FILTER_RULES = (
    "node_modules/**",
    "**/node_modules/**",
    "dist/**",
    "build/**",
    "target/**",
    "__pycache__/**",
    "**/__pycache__/**",
)


@dataclass(frozen=True)
class ReadinessProbe:
    path: str = "/"
    expected_status: int = 200


@dataclass(frozen=True)
class TemplateDescriptor:
    template_id: str
    description: str
    launch_command: str
    probe: ReadinessProbe = field(default_factory=ReadinessProbe)
    filter_rules: tuple[str, ...] = ()
    protected: tuple[str, ...] = ()
    install_command: str | None = None
    source_dir: Path | None = None

    def __post_init__(self):
        if not self.launch_command.strip():
            raise WorkspaceError(f"template {self.template_id!r} has no launch command")


def _descriptor_from_manifest(manifest_path: Path) -> TemplateDescriptor:
    data = json.loads(manifest_path.read_text(encoding="utf-8"))
    probe_data = data.get("probe", {})
    rules = list(data.get("filter_rules", []))
    for default in DEFAULT_FILTER_RULES:
        if default not in rules:
            rules.append(default)
    return TemplateDescriptor(
        template_id=data["id"],
        description=data.get("description", ""),
        launch_command=data["launch_command"],
        probe=ReadinessProbe(
            path=probe_data.get("path", "/"),
            expected_status=int(probe_data.get("expected_status", 200)),
        ),
        filter_rules=tuple(rules),
        protected=tuple(data.get("protected", [])),
        install_command=data.get("install_command"),
        source_dir=manifest_path.parent,
    )


class TemplateStore:
    """All templates found under one local directory, keyed by id."""

    def __init__(self, root: Path):
        self.root = Path(root)
        self._templates: dict[str, TemplateDescriptor] = {}
        if self.root.is_dir():
            for manifest in sorted(self.root.glob("*/manifest.json")):
                descriptor = _descriptor_from_manifest(manifest)
                self._templates[descriptor.template_id] = descriptor

    def __len__(self) -> int:
        return len(self._templates)

    def get(self, template_id: str) -> TemplateDescriptor:
        try:
            return self._templates[template_id]
        except KeyError:
            raise TemplateNotFound(template_id) from None

    def has(self, template_id: str) -> bool:
        return template_id in self._templates

    def descriptors(self) -> list[TemplateDescriptor]:
        return [self._templates[key] for key in sorted(self._templates)]


def builtin_store() -> TemplateStore:
    """The minimal fixture templates shipped inside the package."""
    return TemplateStore(Path(__file__).resolve().parent.parent / "templates_builtin")


def init_from_template(template: TemplateDescriptor, dest: Path) -> WorkspaceState:
    """Copy a template's seed tree into ``dest`` and build the initial state.

    ``dest`` must be absent or empty. The locked set starts as the template's
    protected list; the context buffer and chat summary start empty.
    """
    dest = Path(dest)
    if dest.exists() and any(dest.iterdir()):
        raise DestinationNotEmpty(f"{dest} already contains files")
    files_root = (template.source_dir or Path(".")) / "files"
    if not files_root.is_dir():
        raise TemplateNotFound(template.template_id)
    dest.mkdir(parents=True, exist_ok=True)
    shutil.copytree(files_root, dest, dirs_exist_ok=True)
    ws = WorkspaceState(
        root=dest,
        template=template,
        file_index=scan_tree(dest),
        locked=set(template.protected),
    )
    _write_meta(ws)
    return ws


def load_workspace(root: Path, store: TemplateStore) -> WorkspaceState:
    """Reopen a previously initialized workspace directory."""
    root = Path(root)
    meta_path = root / META_FILENAME
    if not meta_path.is_file():
        raise WorkspaceError(f"{root} is not a webforge workspace (missing {META_FILENAME})")
    meta = json.loads(meta_path.read_text(encoding="utf-8"))
    template = store.get(meta["template_id"])
    return WorkspaceState(
        root=root,
        template=template,
        file_index=scan_tree(root),
        locked=set(meta.get("locked", [])),
        chat_summary=meta.get("chat_summary", ""),
    )


def save_meta(ws: WorkspaceState) -> None:
    _write_meta(ws)


def _write_meta(ws: WorkspaceState) -> None:
    meta = {
        "template_id": ws.template.template_id,
        "locked": sorted(ws.locked),
        "chat_summary": ws.chat_summary,
    }
    (ws.root / META_FILENAME).write_text(
        json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
