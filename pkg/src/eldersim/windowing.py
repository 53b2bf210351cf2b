"""Time-aligned windowing of incoming sensor readings.

Readings are buffered per sensor type and emitted as fixed-length fusion
windows (default 3 s) that advance in discrete hops (default 1 s).  A reading
belongs to a window when it lies inside the tolerance-padded interval
[start - tol, end + tol]; anything older than start - tol is discarded on
advance.  One manager instance is owned by one pipeline and mutated
sequentially.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field

from .errors import OrderingError, RejectedReadingError
from .types import SensorReading, SensorType

DEFAULT_WINDOW_MS = 3000
DEFAULT_HOP_MS = 1000
DEFAULT_TOLERANCE_MS = 100

# Hard cap per sensor type; oldest entries drop first under pathological load.
MAX_BUFFERED_PER_TYPE = 10_000


@dataclass(slots=True)
class FusionWindow:
    """One emitted window with per-type reading lists sorted by timestamp."""

    window_start: int
    window_end: int
    readings_by_type: dict[SensorType, list[SensorReading]] = field(default_factory=dict)

    def readings(self, sensor_type: SensorType) -> list[SensorReading]:
        return self.readings_by_type.get(sensor_type, [])

    def is_empty(self) -> bool:
        return not any(self.readings_by_type.values())


class WindowManager:
    """Buffers readings and emits tolerance-padded fusion windows."""

    def __init__(
        self,
        window_ms: int = DEFAULT_WINDOW_MS,
        hop_ms: int = DEFAULT_HOP_MS,
        tolerance_ms: int = DEFAULT_TOLERANCE_MS,
        max_buffered: int = MAX_BUFFERED_PER_TYPE,
    ) -> None:
        if window_ms <= 0 or hop_ms <= 0 or tolerance_ms < 0:
            raise ValueError("window and hop must be positive, tolerance non-negative")
        self.window_ms = window_ms
        self.hop_ms = hop_ms
        self.tolerance_ms = tolerance_ms
        self.max_buffered = max_buffered
        self.rejected_count = 0
        self.overflow_count = 0
        self._buffers: dict[SensorType, list[SensorReading]] = {t: [] for t in SensorType}
        self._keys: dict[SensorType, list[int]] = {t: [] for t in SensorType}
        self._last_window_end: int | None = None
        self._last_advance: int | None = None

    def ingest(self, reading: SensorReading) -> None:
        """Store one reading, keeping the per-type buffer timestamp-sorted.

        Raises RejectedReadingError on malformed input; the reading is counted
        in rejected_count and the pipeline keeps running.
        """
        try:
            reading.validate()
        except RejectedReadingError:
            self.rejected_count += 1
            raise
        buf = self._buffers[reading.sensor_type]
        keys = self._keys[reading.sensor_type]
        if not keys or reading.timestamp >= keys[-1]:
            buf.append(reading)
            keys.append(reading.timestamp)
        else:
            # Out-of-order arrival: insert at the sorted position.
            pos = bisect_right(keys, reading.timestamp)
            buf.insert(pos, reading)
            keys.insert(pos, reading.timestamp)
        if len(buf) > self.max_buffered:
            del buf[0]
            del keys[0]
            self.overflow_count += 1

    def advance(self, now: int) -> FusionWindow | None:
        """Emit the window ending at ``now`` once a full hop has elapsed.

        Returns None when called again within the same hop.  Emitting also
        discards buffered readings older than window_start - tolerance.
        """
        if self._last_advance is not None and now < self._last_advance:
            raise OrderingError(f"advance time went backwards: {now} < {self._last_advance}")
        self._last_advance = now
        if self._last_window_end is not None and now - self._last_window_end < self.hop_ms:
            return None
        start = now - self.window_ms
        low = start - self.tolerance_ms
        high = now + self.tolerance_ms
        by_type: dict[SensorType, list[SensorReading]] = {}
        for sensor_type in SensorType:
            keys = self._keys[sensor_type]
            if not keys:
                continue
            buf = self._buffers[sensor_type]
            cut = bisect_left(keys, low)
            if cut:
                del buf[:cut]
                del keys[:cut]
            if not keys:
                continue
            stop = bisect_right(keys, high)
            if stop:
                by_type[sensor_type] = buf[:stop]
        self._last_window_end = now
        return FusionWindow(window_start=start, window_end=now, readings_by_type=by_type)

    def buffered_count(self) -> int:
        return sum(len(b) for b in self._buffers.values())


__all__ = [
    "DEFAULT_WINDOW_MS",
    "DEFAULT_HOP_MS",
    "DEFAULT_TOLERANCE_MS",
    "MAX_BUFFERED_PER_TYPE",
    "FusionWindow",
    "WindowManager",
]
