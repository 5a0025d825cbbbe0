"""Record/replay cassettes: deterministic model replies for offline runs.

A cassette is a newline-delimited file; each line is a self-contained JSON
record ``{"fingerprint": ..., "reply": {...}}``. The format is appendable
while recording and diffs cleanly in version control.

Lookup is a pure function of the fingerprint: recording the same request
twice keeps the latest reply (at temperature 0 they should be identical
anyway), which also makes replay independent of scheduling order when
several workers share one cassette.
"""

from __future__ import annotations

import enum
import json
import logging
import threading
from pathlib import Path

from webforge.errors import CassetteMiss, GatewayError
from webforge.gateway.types import ModelReply


logger = logging.getLogger(__name__)


class CassetteMode(str, enum.Enum):
    RECORD = "record"
    REPLAY = "replay"
    PASSTHROUGH = "passthrough"


class ReplayCassette:
    def __init__(self, path: Path | None, mode: CassetteMode | str):
        self.mode = CassetteMode(mode)
        self.path = Path(path) if path is not None else None
        self._entries: dict[str, ModelReply] = {}
        self._lock = threading.Lock()
        if self.mode is not CassetteMode.PASSTHROUGH:
            if self.path is None:
                raise GatewayError(f"{self.mode.value} mode needs a cassette path")
            if self.path.exists():
                self._load()
            elif self.mode is CassetteMode.REPLAY:
                raise GatewayError(f"cassette file not found: {self.path}")

    def _load(self) -> None:
        assert self.path is not None
        with self.path.open(encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    record = json.loads(line)
                    reply = ModelReply.from_json_dict(record["reply"])
                    fingerprint = record["fingerprint"]
                except (json.JSONDecodeError, KeyError, TypeError) as exc:
                    raise GatewayError(
                        f"corrupt cassette record at {self.path}:{line_no}: {exc}"
                    ) from exc
                self._entries[fingerprint] = reply
        logger.debug("loaded %d cassette entries from %s", len(self._entries), self.path)

    def __len__(self) -> int:
        return len(self._entries)

    def lookup(self, fingerprint: str) -> ModelReply:
        try:
            return self._entries[fingerprint]
        except KeyError:
            raise CassetteMiss(fingerprint) from None

    def contains(self, fingerprint: str) -> bool:
        return fingerprint in self._entries

    def append(self, fingerprint: str, reply: ModelReply) -> None:
        """Record one exchange; appends are serialized for concurrent callers."""
        if self.mode is not CassetteMode.RECORD:
            raise GatewayError("append is only valid in record mode")
        assert self.path is not None
        line = json.dumps(
            {"fingerprint": fingerprint, "reply": reply.to_json_dict()},
            sort_keys=True,
            ensure_ascii=False,
        )
        with self._lock:
            self._entries[fingerprint] = reply
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(line + "\n")
