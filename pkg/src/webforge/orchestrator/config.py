"""Pipeline configuration: file + environment + flag layering."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace
from pathlib import Path

from webforge.errors import WebforgeError
from webforge.gateway.types import ProviderConfig

TESTGEN_MODES = ("multi-step", "straightforward")
DRIVERS = ("http-probe", "cdp")

ENV_ENDPOINT = "WEBFORGE_ENDPOINT"
ENV_MODEL = "WEBFORGE_MODEL"


@dataclass(frozen=True)
class PipelineConfig:
    """Everything a run needs; immutable once the run starts.

    ``max_iter`` = 0 disables the testing agent entirely (no-feedback mode);
    otherwise up to ``max_iter`` test/refine rounds run, stopping early when
    a round passes completely.
    """

    provider: ProviderConfig = field(default_factory=ProviderConfig)
    max_iter: int = 3
    parallelism: int = 2
    step_budget: int = 15
    retry_bound: int = 2
    testgen_mode: str = "multi-step"
    cassette_path: Path | None = None
    cassette_mode: str = "passthrough"
    template_store_dir: Path | None = None
    fallback_template_id: str = "static-site"
    driver: str = "http-probe"
    cdp_host: str = "127.0.0.1"
    cdp_port: int = 9222
    summary_budget: int = 4000
    base_port: int = 8900
    probe_timeout_s: float = 20.0
    keep_round_trees: bool = True

    def __post_init__(self):
        if self.max_iter < 0:
            raise WebforgeError("max_iter must be >= 0")
        if self.parallelism < 1:
            raise WebforgeError("parallelism must be >= 1")
        if self.step_budget < 1 or self.retry_bound < 0:
            raise WebforgeError("step budget / retry bounds out of range")
        if self.testgen_mode not in TESTGEN_MODES:
            raise WebforgeError(f"unknown testgen mode {self.testgen_mode!r}")
        if self.driver not in DRIVERS:
            raise WebforgeError(f"unknown driver {self.driver!r}")

    def to_json_dict(self) -> dict:
        return {
            "provider": self.provider.to_json_dict(),
            "max_iter": self.max_iter,
            "parallelism": self.parallelism,
            "step_budget": self.step_budget,
            "retry_bound": self.retry_bound,
            "testgen_mode": self.testgen_mode,
            "cassette_path": str(self.cassette_path) if self.cassette_path else None,
            "cassette_mode": self.cassette_mode,
            "template_store_dir": (
                str(self.template_store_dir) if self.template_store_dir else None
            ),
            "fallback_template_id": self.fallback_template_id,
            "driver": self.driver,
            "cdp_host": self.cdp_host,
            "cdp_port": self.cdp_port,
            "summary_budget": self.summary_budget,
            "base_port": self.base_port,
            "probe_timeout_s": self.probe_timeout_s,
            "keep_round_trees": self.keep_round_trees,
        }


def load_config(path: Path | None = None, **overrides) -> PipelineConfig:
    """Build a config from an optional JSON file, env vars, then overrides."""
    data: dict = {}
    if path is not None:
        data = json.loads(Path(path).read_text(encoding="utf-8"))

    provider_data = dict(data.pop("provider", {}))
    if os.environ.get(ENV_ENDPOINT):
        provider_data["endpoint"] = os.environ[ENV_ENDPOINT]
    if os.environ.get(ENV_MODEL):
        provider_data["model"] = os.environ[ENV_MODEL]
    provider = ProviderConfig.from_json_dict(provider_data)

    known = {f: data[f] for f in PipelineConfig.__dataclass_fields__ if f in data}
    for key in ("cassette_path", "template_store_dir"):
        if known.get(key):
            known[key] = Path(known[key])
    config = PipelineConfig(provider=provider, **known)
    cleaned = {k: v for k, v in overrides.items() if v is not None}
    if cleaned:
        config = replace(config, **cleaned)
    return config
