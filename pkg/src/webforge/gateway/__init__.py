"""Single choke point for model interactions: structured output, record/replay."""

from webforge.gateway.cassette import CassetteMode, ReplayCassette
from webforge.gateway.gateway import LLMGateway, ParsedDocument
from webforge.gateway.types import (
    Grammar,
    ImageAttachment,
    ModelReply,
    PromptBundle,
    ProviderConfig,
    bundle_fingerprint,
)

__all__ = [
    "CassetteMode",
    "ReplayCassette",
    "LLMGateway",
    "ParsedDocument",
    "Grammar",
    "ImageAttachment",
    "ModelReply",
    "PromptBundle",
    "ProviderConfig",
    "bundle_fingerprint",
]
