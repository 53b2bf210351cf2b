"""Uplink: topics, offline buffering, eviction, replay order, sequences."""

from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eldersim.uplink import CloudCollector, OfflineBuffer, UplinkClient, UplinkEnvelope


def _client(capacity: int = 1000) -> tuple[UplinkClient, CloudCollector]:
    cloud = CloudCollector()
    client = UplinkClient("gw1", capacity=capacity, transit_ms=50, on_sent=cloud.receive)
    return client, cloud


def test_envelope_topic_suffix_is_validated():
    with pytest.raises(ValueError):
        UplinkEnvelope(topic="gw1/bogus", payload="{}", enqueued_at=0, sequence=1)


def test_publish_with_link_up_sends_immediately():
    client, cloud = _client()
    envelope = client.make_envelope("data", "{}", now=100)
    assert client.publish(envelope, link_up=True, now=100) == "sent"
    assert len(cloud.received) == 1
    assert client.transcript[-1].sent_at == 150  # transit latency applied


def test_publish_with_link_down_buffers():
    client, cloud = _client()
    for i in range(999):
        client.publish(client.make_envelope("data", "{}", now=i), link_up=False, now=i)
    assert len(client.buffer) == 999
    client.publish(client.make_envelope("data", "{}", now=999), link_up=False, now=999)
    assert len(client.buffer) == 1000
    assert cloud.received == []


def test_full_buffer_evicts_oldest_and_counts_drop():
    client, _ = _client(capacity=3)
    for i in range(4):
        client.publish(client.make_envelope("data", str(i), now=i), link_up=False, now=i)
    assert len(client.buffer) == 3
    assert client.dropped_count == 1
    replayed = client.replay_on_reconnect(now=10)
    assert [e.sequence for e in replayed] == [2, 3, 4]


def test_replay_preserves_order_and_empties_buffer():
    client, cloud = _client()
    for i in range(900):
        client.publish(client.make_envelope("data", str(i), now=i), link_up=False, now=i)
    replayed = client.replay_on_reconnect(now=2000)
    assert len(replayed) == 900
    assert [e.sequence for e in replayed] == list(range(1, 901))
    assert len(client.buffer) == 0
    assert [e.sequence for e in cloud.received] == list(range(1, 901))
    assert cloud.gap_total == 0


def test_overload_during_outage_drops_exactly_the_oldest():
    client, cloud = _client(capacity=1000)
    for i in range(1200):
        client.publish(client.make_envelope("data", str(i), now=i), link_up=False, now=i)
    assert client.dropped_count == 200
    replayed = client.replay_on_reconnect(now=5000)
    assert len(replayed) == 1000
    assert [e.sequence for e in replayed] == list(range(201, 1201))
    assert cloud.gap_total == 200


def test_empty_replay_is_empty():
    client, _ = _client()
    assert client.replay_on_reconnect(now=0) == []


def test_heartbeat_topic_and_sequence():
    client, _ = _client()
    first = client.heartbeat(now=0)
    second = client.heartbeat(now=30_000)
    assert first.topic == "gw1/status"
    assert second.sequence > first.sequence
    assert '"uptime_ms":30000' in second.payload


def test_heartbeat_buffers_during_outage_like_any_envelope():
    client, cloud = _client()
    beat = client.heartbeat(now=0)
    assert client.publish(beat, link_up=False, now=0) == "buffered"
    assert cloud.received == []
    client.replay_on_reconnect(now=100)
    assert [e.topic for e in cloud.received] == ["gw1/status"]


def test_cloud_sees_strictly_increasing_sequences_with_gaps_equal_to_drops():
    client, cloud = _client(capacity=5)
    client.publish(client.make_envelope("data", "a", now=0), link_up=True, now=0)
    for i in range(8):  # 3 evictions at capacity 5
        client.publish(client.make_envelope("data", str(i), now=i), link_up=False, now=i)
    client.replay_on_reconnect(now=50)
    sequences = [e.sequence for e in cloud.received]
    assert sequences == sorted(sequences)
    assert cloud.gap_total == client.dropped_count == 3


def test_transcript_records_drops_and_outcomes():
    client, _ = _client(capacity=1)
    client.publish(client.make_envelope("data", "x", now=0), link_up=False, now=0)
    client.publish(client.make_envelope("data", "y", now=1), link_up=False, now=1)
    client.replay_on_reconnect(now=2)
    outcomes = [e.outcome for e in client.transcript]
    assert outcomes == ["dropped", "replayed"]
    assert '"outcome":"dropped"' in client.transcript_lines()[0]


@settings(max_examples=100, deadline=None)
@given(
    outage=st.tuples(st.integers(0, 200), st.integers(0, 200)).map(sorted),
    total=st.integers(min_value=1, max_value=300),
)
def test_replay_order_matches_enqueue_order_for_any_outage(outage, total):
    down_at, up_at = outage
    client, cloud = _client()
    for i in range(total):
        link_up = not (down_at <= i < up_at)
        if link_up and len(client.buffer):
            # A reconnect replays the backlog before anything new is sent.
            client.replay_on_reconnect(now=i)
        client.publish(client.make_envelope("data", str(i), now=i), link_up=link_up, now=i)
    client.replay_on_reconnect(now=total)
    sequences = [e.sequence for e in cloud.received]
    assert sequences == sorted(sequences)
    assert len(sequences) == total
