"""Prompt bundles, replies, provider configuration, request fingerprints."""

from __future__ import annotations

import base64
import enum
from dataclasses import dataclass

from webforge.canonical import fingerprint_of
from webforge.errors import GatewayError


class Grammar(str, enum.Enum):
    """What shape of reply the caller expects back."""

    FREE_TEXT = "free-text"
    JSON_ARRAY = "json-array"
    XML_ACTIONS = "xml-actions"
    XML_SELECTION = "xml-selection"


@dataclass(frozen=True)
class ImageAttachment:
    data: bytes
    format: str  # raster format, e.g. "png" or "jpeg"

    def __post_init__(self):
        if not self.format:
            raise GatewayError("image attachment needs a declared raster format")
        if not isinstance(self.data, bytes) or not self.data:
            raise GatewayError("image attachment needs non-empty bytes")


Turn = str | ImageAttachment


@dataclass(frozen=True)
class PromptBundle:
    """One request to the model: system text plus ordered user turns."""

    system: str
    turns: tuple[Turn, ...]
    grammar: Grammar = Grammar.FREE_TEXT

    def __post_init__(self):
        if not self.turns:
            raise GatewayError("a prompt bundle needs at least one user turn")

    def with_turn(self, turn: Turn) -> "PromptBundle":
        return PromptBundle(self.system, self.turns + (turn,), self.grammar)

    def text(self) -> str:
        """All text turns joined; used for routing and diagnostics only."""
        return "\n".join(t for t in self.turns if isinstance(t, str))


def bundle_fingerprint(bundle: PromptBundle) -> str:
    """Stable identity of a bundle, including image bytes.

    Built from a canonical key-sorted encoding, so it does not depend on how
    any upstream mapping happened to be ordered.
    """
    turns = []
    for turn in bundle.turns:
        if isinstance(turn, str):
            turns.append({"kind": "text", "text": turn})
        else:
            turns.append(
                {
                    "kind": "image",
                    "format": turn.format,
                    "data": base64.b64encode(turn.data).decode("ascii"),
                }
            )
    return fingerprint_of(
        {"system": bundle.system, "grammar": bundle.grammar.value, "turns": turns}
    )


@dataclass(frozen=True)
class ModelReply:
    text: str
    input_tokens: int = 0
    output_tokens: int = 0
    latency_ms: int = 0

    def to_json_dict(self) -> dict:
        return {
            "text": self.text,
            "input_tokens": self.input_tokens,
            "output_tokens": self.output_tokens,
            "latency_ms": self.latency_ms,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "ModelReply":
        return cls(
            text=data["text"],
            input_tokens=int(data.get("input_tokens", 0)),
            output_tokens=int(data.get("output_tokens", 0)),
            latency_ms=int(data.get("latency_ms", 0)),
        )


@dataclass(frozen=True)
class ProviderConfig:
    """How to reach the model provider.

    Temperature is pinned to 0 because every agent in the pipeline depends
    on reply determinism; the constructor refuses anything else.
    """

    endpoint: str = ""
    model: str = ""
    temperature: float = 0.0
    max_output_tokens: int = 8192
    timeout_s: float = 120.0
    max_reasks: int = 2
    transport_retries: int = 2
    api_key_env: str = "WEBFORGE_API_KEY"
    image_encoding: str = "data-url"

    def __post_init__(self):
        if self.temperature != 0.0:
            raise GatewayError("temperature is fixed at 0")
        if self.timeout_s <= 0:
            raise GatewayError("timeout must be positive")
        if self.max_reasks < 0:
            raise GatewayError("max_reasks must be >= 0")

    def to_json_dict(self) -> dict:
        return {
            "endpoint": self.endpoint,
            "model": self.model,
            "temperature": self.temperature,
            "max_output_tokens": self.max_output_tokens,
            "timeout_s": self.timeout_s,
            "max_reasks": self.max_reasks,
            "transport_retries": self.transport_retries,
            "api_key_env": self.api_key_env,
            "image_encoding": self.image_encoding,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "ProviderConfig":
        known = {f: data[f] for f in cls.__dataclass_fields__ if f in data}
        return cls(**known)
