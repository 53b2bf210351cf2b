"""Gateway-to-cloud envelopes with offline store-and-forward buffering.

Envelopes ride a four-suffix topic hierarchy (<gateway>/status, /data,
/alert, /cmd) with a per-gateway strictly increasing sequence number.  While
the link is down, envelopes queue in a 1,000-entry buffer that evicts its
oldest entry when full; on reconnect the whole buffer replays in sequence
order, so short outages lose nothing and the cloud can account for every
drop as a sequence gap.

Only aggregated summaries and alerts ever ride the uplink; raw sensor
samples stay on the gateway.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from typing import Callable

OFFLINE_BUFFER_CAPACITY = 1000
TOPIC_SUFFIXES = ("status", "data", "alert", "cmd")
DEFAULT_TRANSIT_MS = 50


@dataclass(slots=True)
class UplinkEnvelope:
    topic: str
    payload: str
    enqueued_at: int
    sequence: int

    def __post_init__(self) -> None:
        suffix = self.topic.rsplit("/", 1)[-1]
        if suffix not in TOPIC_SUFFIXES:
            raise ValueError(f"unknown topic suffix in {self.topic!r}")


class OfflineBuffer:
    """Bounded FIFO of envelopes; oldest entry drops first when full."""

    def __init__(self, capacity: int = OFFLINE_BUFFER_CAPACITY) -> None:
        self.capacity = capacity
        self.dropped = 0
        self._queue: deque[UplinkEnvelope] = deque()

    def push(self, envelope: UplinkEnvelope) -> UplinkEnvelope | None:
        """Append; returns the evicted envelope when the buffer was full."""
        evicted = None
        if len(self._queue) >= self.capacity:
            evicted = self._queue.popleft()
            self.dropped += 1
        self._queue.append(envelope)
        return evicted

    def drain(self) -> list[UplinkEnvelope]:
        items = list(self._queue)
        self._queue.clear()
        return items

    def __len__(self) -> int:
        return len(self._queue)


@dataclass(slots=True)
class TranscriptEntry:
    topic: str
    sequence: int
    enqueued_at: int
    sent_at: int | None
    outcome: str

    def to_line(self) -> str:
        return json.dumps(
            {
                "topic": self.topic,
                "sequence": self.sequence,
                "enqueued_at": self.enqueued_at,
                "sent_at": self.sent_at,
                "outcome": self.outcome,
            },
            separators=(",", ":"),
        )


@dataclass(slots=True)
class HeartbeatBody:
    gateway_id: str
    uptime_ms: int
    buffer_depth: int

    def to_json(self) -> str:
        return json.dumps(
            {
                "gateway_id": self.gateway_id,
                "uptime_ms": self.uptime_ms,
                "buffer_depth": self.buffer_depth,
            },
            separators=(",", ":"),
        )


class UplinkClient:
    """Per-gateway publisher with offline buffering and in-order replay."""

    def __init__(
        self,
        gateway_id: str,
        capacity: int = OFFLINE_BUFFER_CAPACITY,
        transit_ms: int = DEFAULT_TRANSIT_MS,
        on_sent: Callable[[UplinkEnvelope, int], None] | None = None,
    ) -> None:
        self.gateway_id = gateway_id
        self.transit_ms = transit_ms
        self.buffer = OfflineBuffer(capacity)
        self.transcript: list[TranscriptEntry] = []
        self.sent_count = 0
        self.buffered_count = 0
        self.replayed_count = 0
        self._sequence = 0
        self._started_at: int | None = None
        self._on_sent = on_sent

    def make_envelope(self, suffix: str, payload: str, now: int) -> UplinkEnvelope:
        self._sequence += 1
        return UplinkEnvelope(
            topic=f"{self.gateway_id}/{suffix}",
            payload=payload,
            enqueued_at=now,
            sequence=self._sequence,
        )

    def heartbeat(self, now: int) -> UplinkEnvelope:
        """Status-topic envelope carrying uptime and current buffer depth."""
        if self._started_at is None:
            self._started_at = now
        body = HeartbeatBody(
            gateway_id=self.gateway_id,
            uptime_ms=now - self._started_at,
            buffer_depth=len(self.buffer),
        )
        return self.make_envelope("status", body.to_json(), now)

    def publish(self, envelope: UplinkEnvelope, link_up: bool, now: int) -> str:
        """Send immediately when the link is up, otherwise buffer; returns the outcome."""
        if link_up:
            self._send(envelope, now)
            return "sent"
        evicted = self.buffer.push(envelope)
        if evicted is not None:
            self.transcript.append(
                TranscriptEntry(
                    topic=evicted.topic,
                    sequence=evicted.sequence,
                    enqueued_at=evicted.enqueued_at,
                    sent_at=None,
                    outcome="dropped",
                )
            )
        self.buffered_count += 1
        return "buffered"

    def replay_on_reconnect(self, now: int) -> list[UplinkEnvelope]:
        """Flush the offline buffer in sequence order once the link returns."""
        replayed = self.buffer.drain()
        for envelope in replayed:
            self._send(envelope, now, outcome="replayed")
        self.replayed_count += len(replayed)
        return replayed

    @property
    def dropped_count(self) -> int:
        return self.buffer.dropped

    @property
    def envelope_count(self) -> int:
        return self._sequence

    def transcript_lines(self) -> list[str]:
        return [entry.to_line() for entry in self.transcript]

    def _send(self, envelope: UplinkEnvelope, now: int, outcome: str = "sent") -> None:
        sent_at = now + self.transit_ms
        self.transcript.append(
            TranscriptEntry(
                topic=envelope.topic,
                sequence=envelope.sequence,
                enqueued_at=envelope.enqueued_at,
                sent_at=sent_at,
                outcome=outcome,
            )
        )
        self.sent_count += 1
        if self._on_sent is not None:
            self._on_sent(envelope, sent_at)


class CloudCollector:
    """Receiving side of the uplink; checks per-gateway sequence monotonicity."""

    def __init__(self) -> None:
        self.received: list[UplinkEnvelope] = []
        self._last_sequence: dict[str, int] = {}
        self.gap_total = 0

    def receive(self, envelope: UplinkEnvelope, _sent_at: int) -> None:
        gateway = envelope.topic.split("/", 1)[0]
        last = self._last_sequence.get(gateway, 0)
        if envelope.sequence <= last:
            raise ValueError(
                f"sequence {envelope.sequence} from {gateway} not increasing past {last}"
            )
        self.gap_total += envelope.sequence - last - 1
        self._last_sequence[gateway] = envelope.sequence
        self.received.append(envelope)
