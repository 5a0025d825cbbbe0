"""Append-only run journal: one JSON event per line.

Events carry a monotonically increasing sequence number instead of wall-clock
timestamps, so replayed runs produce diffable journals; wall-clock lives in
the run manifest. An optional echo callback streams each line as it is
written (the CLI uses this for progress output).
"""

from __future__ import annotations

import json
import threading
from pathlib import Path
from typing import Callable


class RunJournal:
    def __init__(self, path: Path, echo: Callable[[str], None] | None = None):
        self.path = Path(path)
        self.echo = echo
        self._lock = threading.Lock()
        self._seq = 0
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.path.touch()

    def emit(self, event: str, **fields) -> None:
        with self._lock:
            self._seq += 1
            record = {"seq": self._seq, "event": event, **fields}
            line = json.dumps(record, sort_keys=True, ensure_ascii=False)
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(line + "\n")
        if self.echo is not None:
            self.echo(line)

    def events(self) -> list[dict]:
        out = []
        for line in self.path.read_text(encoding="utf-8").splitlines():
            if line.strip():
                out.append(json.loads(line))
        return out
