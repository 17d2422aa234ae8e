"""Per-principal token buckets.

A registry answering unauthenticated-scale traffic would be an amplification
vector; the bucket keeps any single principal's request rate bounded.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass


@dataclass
class _Bucket:
    tokens: float
    updated: float


class RateLimiter:
    def __init__(self, capacity: int, refill_per_sec: float):
        self.capacity = float(capacity)
        self.refill = refill_per_sec
        self._buckets: dict[str, _Bucket] = {}
        self._lock = threading.Lock()

    def allow(self, principal_id: str, *, now: float | None = None) -> bool:
        t = time.monotonic() if now is None else now
        with self._lock:
            bucket = self._buckets.get(principal_id)
            if bucket is None:
                bucket = _Bucket(tokens=self.capacity, updated=t)
                self._buckets[principal_id] = bucket
            bucket.tokens = min(self.capacity, bucket.tokens + (t - bucket.updated) * self.refill)
            bucket.updated = t
            if bucket.tokens < 1.0:
                return False
            bucket.tokens -= 1.0
            return True
