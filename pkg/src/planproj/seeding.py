"""Stable derivation of independent RNG seeds from a master seed."""

from __future__ import annotations

import hashlib


def derive_seed(master: int, *parts: int | str) -> int:
    """Derive a 64-bit child seed from a master seed and a key path.

    Uses SHA-256 so the result is stable across processes and platforms
    (unlike ``hash()``, which is randomized per interpreter run).
    """
    digest = hashlib.sha256()
    digest.update(str(int(master)).encode("ascii"))
    for part in parts:
        digest.update(b"/")
        digest.update(str(part).encode("utf-8"))
    return int.from_bytes(digest.digest()[:8], "big")
