"""Canonical serialization helpers.

Two encodings are used throughout:

* ``canonical_json_bytes``: compact, key-sorted JSON used wherever a stable
  byte string is hashed (request fingerprints, tree hashes). Sorting makes the
  encoding independent of dict insertion order.
* ``stable_dumps``: human-readable, key-sorted JSON used for files that are
  byte-compared across runs (suites, feedback bundles, reports).
"""

from __future__ import annotations

import hashlib
import json
from typing import Any


def canonical_json_bytes(value: Any) -> bytes:
    return json.dumps(
        value, sort_keys=True, separators=(",", ":"), ensure_ascii=False
    ).encode("utf-8")


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def fingerprint_of(value: Any) -> str:
    """sha256 of the canonical JSON encoding of ``value``."""
    return sha256_hex(canonical_json_bytes(value))


def stable_dumps(value: Any) -> str:
    """Key-sorted, indented JSON with a trailing newline.

    Serialize -> parse -> serialize is byte-identical for JSON-native data.
    """
    return json.dumps(value, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
