"""Client-side motion cache: decouples the server's bursty frame arrival
from the fixed 20 ms playback clock.

Push requires contiguous frame indices and blocks the producer when the
buffer is full (frames are never dropped); pop is driven by the playback
ticker and repeats the last delivered frame, flagged `held`, on underrun.
"""

import threading
from collections import deque
from dataclasses import dataclass

PLAYBACK_TICK_MS = 20.0


class CacheSequenceError(ValueError):
    pass


@dataclass
class PopResult:
    frame: object  # 36-value list/array, or None before anything arrived
    index: int  # absolute frame index, -1 before anything delivered
    held: bool


class MotionCache:
    def __init__(self, capacity: int = 512):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self._frames = deque()
        self._next_push = None  # next expected absolute index
        self._cursor = None  # next index to deliver
        self._last = None
        self._last_index = -1
        self._lock = threading.Condition()
        self._closed = False

    def push(self, first_frame_index: int, frames) -> None:
        """Append a contiguous chunk; blocks while the buffer is full."""
        frames = list(frames)
        if not frames:
            return
        with self._lock:
            if self._next_push is not None and first_frame_index != self._next_push:
                raise CacheSequenceError(f"expected frame index {self._next_push}, got {first_frame_index}")
            if self._next_push is None:
                self._next_push = first_frame_index
                self._cursor = first_frame_index
            for frame in frames:
                while len(self._frames) >= self.capacity and not self._closed:
                    self._lock.wait(0.05)
                if self._closed:
                    return
                self._frames.append((self._next_push, frame))
                self._next_push += 1
            self._lock.notify_all()

    def pop(self, now_ms: float | None = None) -> PopResult:
        """Deliver the next buffered frame, or repeat the last one flagged held."""
        with self._lock:
            if self._frames and self._cursor is not None and self._frames[0][0] == self._cursor:
                idx, frame = self._frames.popleft()
                self._cursor += 1
                self._last = frame
                self._last_index = idx
                self._lock.notify_all()
                return PopResult(frame, idx, held=False)
            return PopResult(self._last, self._last_index, held=True)

    def buffered(self) -> int:
        with self._lock:
            return len(self._frames)

    def close(self) -> None:
        with self._lock:
            self._closed = True
            self._lock.notify_all()
