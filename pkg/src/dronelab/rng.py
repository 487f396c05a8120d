"""Seedable random streams and deterministic seed derivation.

Every mission or session owns exactly one named stream. A stream is a plain
``random.Random`` (Mersenne Twister) identified by its integer seed; the
identity is recorded in logs so any run can be replayed bit for bit.

Draw protocol for one flight: one uniform for the increase (skipped on the
first round of a junction, where the increase is certain), then one uniform
for the crash. Stateful agent policies that need randomness share the same
stream, consuming draws in decision order.
"""

from __future__ import annotations

import hashlib
import random

STREAM_ALGO = "mt19937"


def make_stream(seed: int) -> random.Random:
    return random.Random(seed)


def stream_record(seed: int) -> dict:
    """Log-friendly identity of a stream."""
    return {"algo": STREAM_ALGO, "seed": seed}


def derive_seed(master_seed: int, *path: object) -> int:
    """Derive a child seed from a master seed and a structured path.

    Stable across runs and platforms; children of distinct paths are
    independent for all practical purposes.
    """
    tag = ":".join(str(p) for p in (master_seed, *path))
    digest = hashlib.sha256(tag.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")
