from __future__ import annotations

import json

import pytest

from webforge.errors import WebforgeError
from webforge.orchestrator.config import load_config


def test_defaults_without_file():
    config = load_config(None)
    assert config.max_iter == 3
    assert config.testgen_mode == "multi-step"
    assert config.cassette_mode == "passthrough"


def test_file_values_and_flag_overrides(tmp_path):
    config_file = tmp_path / "config.json"
    config_file.write_text(
        json.dumps(
            {
                "max_iter": 1,
                "parallelism": 6,
                "provider": {"endpoint": "http://file-endpoint", "model": "file-model"},
            }
        )
    )
    config = load_config(config_file, max_iter=2)
    assert config.max_iter == 2  # flag wins over file
    assert config.parallelism == 6
    assert config.provider.endpoint == "http://file-endpoint"
    assert config.provider.model == "file-model"


def test_env_overrides_provider(tmp_path, monkeypatch):
    monkeypatch.setenv("WEBFORGE_ENDPOINT", "http://env-endpoint")
    monkeypatch.setenv("WEBFORGE_MODEL", "env-model")
    config_file = tmp_path / "config.json"
    config_file.write_text(json.dumps({"provider": {"endpoint": "http://file", "model": "m"}}))
    config = load_config(config_file)
    assert config.provider.endpoint == "http://env-endpoint"
    assert config.provider.model == "env-model"


def test_none_overrides_are_ignored():
    config = load_config(None, max_iter=None, parallelism=None)
    assert config.max_iter == 3
    assert config.parallelism == 2


def test_invalid_values_rejected(tmp_path):
    config_file = tmp_path / "config.json"
    config_file.write_text(json.dumps({"provider": {"temperature": 0.9}}))
    with pytest.raises(WebforgeError):
        load_config(config_file)


def test_path_fields_coerced(tmp_path):
    from pathlib import Path

    config_file = tmp_path / "config.json"
    config_file.write_text(
        json.dumps({"template_store_dir": str(tmp_path / "store"), "cassette_path": None})
    )
    config = load_config(config_file)
    assert isinstance(config.template_store_dir, Path)
