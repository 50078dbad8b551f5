import hashlib
import json
import time
from typing import Any

import numpy as onp


def derive_seed(*keys: Any) -> int:
    """
    Derive an independent 32-bit seed from a tuple of keys.

    Keys may be ints or strings; the same keys always give the same seed, and
    different key tuples give statistically independent streams.
    """
    entropy = [_key_to_int(k) for k in keys]
    return int(onp.random.SeedSequence(entropy).generate_state(1)[0])


def _key_to_int(key: Any) -> int:
    if isinstance(key, (int, onp.integer)):
        if key < 0:
            raise ValueError(f"Seed keys must be nonnegative, got {key}")
        return int(key)
    digest = hashlib.sha256(str(key).encode("utf-8")).hexdigest()
    return int(digest[:8], 16)


def make_rng(*keys: Any) -> onp.random.Generator:
    return onp.random.default_rng(derive_seed(*keys))


def stable_hash(payload: Any) -> str:
    """sha256 of the canonical JSON form of payload"""
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


class Stopwatch:
    """
    Accumulating wall-clock timer.

    >>> watch = Stopwatch()
    >>> with watch:
    ...     pass
    >>> watch.elapsed >= 0
    True
    """

    def __init__(self):
        self.elapsed = 0.0
        self._started = None

    def __enter__(self):
        self._started = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed += time.perf_counter() - self._started
        self._started = None
        return False


def timer_resolution() -> float:
    return time.get_clock_info("perf_counter").resolution
