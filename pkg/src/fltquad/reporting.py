"""Canonical JSON and checksums shared by the report emitters."""

from __future__ import annotations

import hashlib
import json


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def checksum(obj) -> str:
    return hashlib.sha256(canonical_json(obj).encode()).hexdigest()
