"""The gateway: completions with cassette support and bounded format re-asks."""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass
from typing import Any, Callable

from webforge.errors import GatewayError, MalformedAfterRetries
from webforge.gateway import markup
from webforge.gateway.cassette import CassetteMode, ReplayCassette
from webforge.gateway.types import (
    Grammar,
    ModelReply,
    PromptBundle,
    ProviderConfig,
    bundle_fingerprint,
)

logger = logging.getLogger(__name__)

Transport = Callable[[PromptBundle, ProviderConfig], ModelReply]

# Fixed corrective template appended as an extra user turn on re-asks.
REASK_TEMPLATE = (
    "Your previous reply did not satisfy the required output format "
    "({grammar}): {problem}\n"
    "Reply again following the required format exactly, with no surrounding "
    "commentary."
)


@dataclass(frozen=True)
class ParsedDocument:
    """A reply that satisfied its declared grammar."""

    grammar: Grammar
    document: Any
    reply: ModelReply
    attempts: int


def _parse_for_grammar(grammar: Grammar, text: str) -> Any:
    """Return the grammar-level document, or raise ValueError to trigger a re-ask."""
    if grammar is Grammar.JSON_ARRAY:
        return markup.extract_json_array(text)
    if grammar is Grammar.XML_ACTIONS:
        blocks, diagnostics = markup.scan_action_blocks(text)
        if not blocks:
            detail = "; ".join(diagnostics) or "no action tags found"
            raise markup.StructureNotFound(detail)
        return blocks
    if grammar is Grammar.XML_SELECTION:
        doc = markup.parse_selection(text)
        if not markup.selection_is_wellformed(doc):
            raise markup.StructureNotFound("; ".join(doc.diagnostics))
        return doc
    raise GatewayError(f"grammar {grammar.value} is not structured")


class LLMGateway:
    """All model traffic flows through here.

    Safe for concurrent use: the cassette serializes its own appends and the
    call counters are lock-protected. In replay mode no transport is touched,
    so a run is provably offline when ``stats()['provider_calls'] == 0``.
    """

    def __init__(
        self,
        cassette: ReplayCassette | None = None,
        transport: Transport | None = None,
    ):
        # Explicit None check: an empty cassette is len() == 0 and thus falsy.
        self.cassette = (
            cassette if cassette is not None else ReplayCassette(None, CassetteMode.PASSTHROUGH)
        )
        self.transport = transport
        self._lock = threading.Lock()
        self._provider_calls = 0
        self._cassette_hits = 0

    def stats(self) -> dict[str, int]:
        with self._lock:
            return {
                "provider_calls": self._provider_calls,
                "cassette_hits": self._cassette_hits,
            }

    def _call_provider(self, bundle: PromptBundle, config: ProviderConfig) -> ModelReply:
        if self.transport is None:
            raise GatewayError(
                "no transport configured; live provider calls are not possible "
                "in this gateway"
            )
        with self._lock:
            self._provider_calls += 1
        return self.transport(bundle, config)

    def complete(self, bundle: PromptBundle, config: ProviderConfig) -> ModelReply:
        """One completion; replayed, recorded, or passed through per cassette mode."""
        fingerprint = bundle_fingerprint(bundle)
        if self.cassette.mode is CassetteMode.REPLAY:
            reply = self.cassette.lookup(fingerprint)
            with self._lock:
                self._cassette_hits += 1
            return reply
        reply = self._call_provider(bundle, config)
        if self.cassette.mode is CassetteMode.RECORD:
            self.cassette.append(fingerprint, reply)
        return reply

    def complete_structured(
        self,
        bundle: PromptBundle,
        config: ProviderConfig,
        validator: Callable[[Any], Any] | None = None,
    ) -> ParsedDocument:
        """Completion that must match the bundle's declared grammar.

        On a malformed reply the request is re-asked with a corrective turn
        appended, up to ``config.max_reasks`` times; total provider traffic is
        therefore bounded by ``1 + max_reasks`` calls. An optional semantic
        ``validator`` runs after grammar parsing and may transform the
        document; raising ValueError from it also triggers a re-ask.
        """
        if bundle.grammar is Grammar.FREE_TEXT:
            raise GatewayError("complete_structured needs a non-free-text grammar")
        attempts: list[str] = []
        current = bundle
        for attempt in range(config.max_reasks + 1):
            reply = self.complete(current, config)
            try:
                document = _parse_for_grammar(bundle.grammar, reply.text)
                if validator is not None:
                    transformed = validator(document)
                    if transformed is not None:
                        document = transformed
            except ValueError as exc:
                attempts.append(reply.text)
                logger.info(
                    "reply violated %s grammar (attempt %d): %s",
                    bundle.grammar.value,
                    attempt + 1,
                    exc,
                )
                if attempt < config.max_reasks:
                    current = current.with_turn(
                        REASK_TEMPLATE.format(
                            grammar=bundle.grammar.value, problem=exc
                        )
                    )
                continue
            return ParsedDocument(bundle.grammar, document, reply, attempt + 1)
        raise MalformedAfterRetries(bundle.grammar.value, attempts)
