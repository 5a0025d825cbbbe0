from __future__ import annotations

import json
from pathlib import Path

import pytest

from webforge.gateway import LLMGateway, ModelReply, ProviderConfig
from webforge.gateway.cassette import CassetteMode, ReplayCassette
from webforge.workspace.templates import TemplateStore, init_from_template

FIXTURES = Path(__file__).parent / "fixtures"


class QueueTransport:
    """Feeds scripted reply texts in order; fails when exhausted."""

    def __init__(self, replies: list[str]):
        self.replies = list(replies)
        self.calls: list[str] = []

    def __call__(self, bundle, config) -> ModelReply:
        self.calls.append(bundle.text())
        if not self.replies:
            raise AssertionError("transport exhausted: unexpected extra model call")
        return ModelReply(text=self.replies.pop(0), input_tokens=1, output_tokens=1)


class RouterTransport:
    """Routes replies by substring markers found in the prompt text."""

    def __init__(self, rules: list[tuple[str, str]], default: str | None = None):
        self.rules = rules
        self.default = default
        self.calls: list[str] = []

    def __call__(self, bundle, config) -> ModelReply:
        text = bundle.text()
        self.calls.append(text)
        for marker, reply in self.rules:
            if marker in text:
                return ModelReply(text=reply, input_tokens=1, output_tokens=1)
        if self.default is not None:
            return ModelReply(text=self.default, input_tokens=1, output_tokens=1)
        raise AssertionError(f"no routing rule matched prompt:\n{text[:400]}")


def forbidden_transport(bundle, config):
    raise AssertionError("network transport must not be used in this test")


@pytest.fixture
def provider_config() -> ProviderConfig:
    return ProviderConfig(endpoint="http://127.0.0.1:1/unused", model="scripted", max_reasks=2)


@pytest.fixture
def gateway_factory(provider_config):
    def make(replies=None, rules=None, default=None):
        if rules is not None:
            transport = RouterTransport(rules, default)
        else:
            transport = QueueTransport(replies or [])
        cassette = ReplayCassette(None, CassetteMode.PASSTHROUGH)
        return LLMGateway(cassette, transport), transport

    return make


def write_template(
    store_dir: Path,
    template_id: str,
    files: dict[str, str],
    *,
    launch_command: str | None = None,
    protected: list[str] | None = None,
    filter_rules: list[str] | None = None,
    description: str = "",
    probe_path: str = "/",
) -> None:
    root = store_dir / template_id
    (root / "files").mkdir(parents=True, exist_ok=True)
    manifest = {
        "id": template_id,
        "description": description or f"fixture template {template_id}",
        "launch_command": launch_command
        or "python3 -m http.server {port} --bind 127.0.0.1 --directory public",
        "probe": {"path": probe_path, "expected_status": 200},
        "filter_rules": filter_rules or [],
        "protected": protected or [],
    }
    (root / "manifest.json").write_text(json.dumps(manifest, indent=2), encoding="utf-8")
    for rel, content in files.items():
        target = root / "files" / rel
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(content, encoding="utf-8")


@pytest.fixture
def template_store(tmp_path) -> TemplateStore:
    store_dir = tmp_path / "store"
    write_template(
        store_dir,
        "fixture-site",
        {
            "public/index.html": "<!doctype html>\n<html><body><h1>Fixture</h1>"
            "<p>hello from the fixture page</p></body></html>\n",
            "public/style.css": "body { margin: 0; }\n",
            "README.md": "# fixture\n",
            "app.lock": "locked\n",
        },
        protected=["app.lock"],
    )
    return TemplateStore(store_dir)


@pytest.fixture
def workspace(template_store, tmp_path):
    return init_from_template(template_store.get("fixture-site"), tmp_path / "ws")
