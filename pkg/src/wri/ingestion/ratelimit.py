"""Per-source request throttling."""

from __future__ import annotations

import threading
import time
from collections import deque
from dataclasses import dataclass
from typing import Callable, Mapping, Optional


@dataclass(frozen=True)
class RateLimit:
    source_id: str
    max_requests: int = 1
    per_seconds: float = 1.0

    def __post_init__(self):
        if self.max_requests < 1 or self.per_seconds <= 0:
            raise ValueError(f"invalid rate limit for {self.source_id}: "
                             f"{self.max_requests}/{self.per_seconds}s")


class RateLimiter:
    """Sliding-window limiter: at most ``max_requests`` per ``per_seconds``.

    Thread safe. ``clock`` and ``sleep`` are injectable for tests.
    """

    def __init__(self, limit: RateLimit, clock: Callable[[], float] = time.monotonic,
                 sleep: Callable[[float], None] = time.sleep):
        self.limit = limit
        self._clock = clock
        self._sleep = sleep
        self._stamps: deque[float] = deque()
        self._lock = threading.Lock()

    def acquire(self) -> float:
        """Block until a request may go out; return the time waited."""
        waited = 0.0
        with self._lock:
            while True:
                now = self._clock()
                while self._stamps and now - self._stamps[0] >= self.limit.per_seconds:
                    self._stamps.popleft()
                if len(self._stamps) < self.limit.max_requests:
                    self._stamps.append(now)
                    return waited
                delay = self.limit.per_seconds - (now - self._stamps[0])
                self._sleep(delay)
                waited += delay


class RateLimiterPool:
    """One limiter per source id, created on first use."""

    def __init__(self, limits: Optional[Mapping[str, RateLimit]] = None, default: RateLimit = None, **kwargs):
        self._limits = dict(limits or {})
        self._default = default
        self._kwargs = kwargs
        self._limiters: dict[str, RateLimiter] = {}
        self._lock = threading.Lock()

    def limit_for(self, source_id: str) -> RateLimit:
        if source_id in self._limits:
            return self._limits[source_id]
        if self._default is not None:
            return RateLimit(source_id, self._default.max_requests, self._default.per_seconds)
        return RateLimit(source_id)

    def get(self, source_id: str) -> RateLimiter:
        with self._lock:
            if source_id not in self._limiters:
                self._limiters[source_id] = RateLimiter(self.limit_for(source_id), **self._kwargs)
            return self._limiters[source_id]

    def acquire(self, source_id: str) -> float:
        return self.get(source_id).acquire()
